/**
 * Window stability tab. One bar per (candidate window, variable) showing the
 * forecast error the service measured; non-viable candidates stay in the
 * chart greyed out but never reach the recommendation callout, because the
 * callout echoes the service ranking and that ranking already excludes them.
 */

import { ApiClient, ApiError, StabilityReport } from "../api.js";
import { BarGroup, barChart } from "../charts.js";
import { asBanner, el, emptyState, fmt } from "../dom.js";
import { UiSession } from "../session.js";

const MODEL_KINDS = ["naive_last", "mean", "linear_trend", "ar_p"];

export function stabilitySection(report: StabilityReport): HTMLElement {
    const section = el("div", { class: "stability-section" });
    if (report.candidates.length === 0) {
        section.append(emptyState("The stability report is empty."));
        return section;
    }

    if (report.ranking.length > 0) {
        section.append(
            el("div", { class: "recommendation" }, [
                `Recommended window: ${report.ranking[0]} (model ${report.model_kind})`,
            ]),
        );
    } else {
        section.append(emptyState("No candidate window is viable."));
    }

    const groups: BarGroup[] = report.candidates.map((cand) => ({
        label: cand.label,
        muted: !cand.viable,
        bars: Object.entries(cand.per_variable).map(([variable, scores]) => ({
            variable,
            value: scores.rmse,
        })),
    }));
    section.append(barChart(groups));

    const table = el("table", { class: "candidate-table" });
    table.append(
        el("tr", {}, [
            el("th", {}, ["window"]),
            el("th", {}, ["steps"]),
            el("th", {}, ["active fraction"]),
            el("th", {}, ["aggregate error"]),
            el("th", {}, ["status"]),
        ]),
    );
    for (const cand of report.candidates) {
        table.append(
            el("tr", { class: cand.viable ? "" : "muted" }, [
                el("td", {}, [cand.label]),
                el("td", {}, [String(cand.k)]),
                el("td", {}, [fmt(cand.active_fraction)]),
                el("td", {}, [fmt(cand.aggregate_score)]),
                el("td", {}, [cand.viable ? "viable" : cand.reason ?? "not viable"]),
            ]),
        );
    }
    section.append(table);
    return section;
}

export class WindowsView {
    private results = el("div", { class: "windows-results" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(this.form(), this.results);
        await this.loadStored();
    }

    private form(): HTMLElement {
        const candidates = el("input", { type: "text", value: "1h,1d", size: "18" });
        const model = el("select", {});
        for (const kind of MODEL_KINDS) {
            const option = el("option", { value: kind }, [kind]);
            if (kind === "ar_p") {
                option.selected = true;
            }
            model.append(option);
        }
        const split = el("input", { type: "number", value: "0.8", step: "0.05", size: "5" });
        const run = el("button", { type: "button" }, ["Assess windows"]);
        run.addEventListener("click", async () => {
            this.results.replaceChildren();
            const labels = candidates.value
                .split(",")
                .map((s) => s.trim())
                .filter((s) => s !== "");
            try {
                const resp = await this.api.assessWindows(this.session.projectId, {
                    candidates: labels,
                    model: model.value,
                    split_ratio: Number(split.value),
                });
                this.results.append(stabilitySection(resp.stability));
            } catch (err) {
                this.results.append(asBanner(err));
            }
        });
        return el("form", { class: "params-form" }, [
            el("label", {}, ["candidate windows ", candidates]),
            el("label", {}, ["model ", model]),
            el("label", {}, ["train split ", split]),
            run,
        ]);
    }

    private async loadStored(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "stability");
            this.results.append(stabilitySection(JSON.parse(text)));
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.results.append(
                    emptyState("No stability report yet. Assess candidate windows above."),
                );
            } else {
                this.results.append(asBanner(err));
            }
        }
    }
}
