/**
 * Validation tab: per-variable verdict badges plus real-vs-simulated
 * overlays and distribution histograms. Badges repeat the report verbatim;
 * a variable the trace does not carry gets a warning row while the rest
 * keep rendering.
 */

import { ApiClient, ApiError, ValidationReport, VariableValidation } from "../api.js";
import { histogram, lineOverlay } from "../charts.js";
import { parseSdlogCsv, parseTraceCsv } from "../csv.js";
import { asBanner, el, emptyState, fmt } from "../dom.js";
import { UiSession } from "../session.js";

export type SeriesByName = Record<string, number[]>;

export function verdictBadge(entry: VariableValidation): HTMLElement {
    const cls = entry.verdict === "pass" ? "badge pass" : "badge fail";
    return el("span", { class: cls, "data-variable": entry.variable }, [
        el("strong", {}, [`${entry.variable}: ${entry.verdict}`]),
        el("small", {}, [` mape ${fmt(entry.mape)} ks ${fmt(entry.ks_statistic)}`]),
    ]);
}

export function validationSection(
    report: ValidationReport,
    real: SeriesByName,
    simulated: SeriesByName,
): HTMLElement {
    const section = el("div", { class: "validation-section" });
    if (report.variables.length === 0) {
        section.append(emptyState("The validation report is empty."));
        return section;
    }

    const badges = el("div", { class: "badges" });
    for (const entry of report.variables) {
        badges.append(verdictBadge(entry));
    }
    section.append(badges);
    section.append(
        el("p", { class: "note" }, [
            `thresholds: mape ≤ ${fmt(report.mape_threshold)}, ` +
                `ks ≤ ${fmt(report.ks_threshold)}; ` +
                `aligned steps: ${report.aligned_steps}`,
        ]),
    );

    for (const entry of report.variables) {
        const block = el("div", { class: "variable-block", "data-variable": entry.variable });
        block.append(el("h3", {}, [entry.variable]));
        const sim = simulated[entry.variable];
        const recorded = real[entry.variable];
        if (!sim) {
            block.append(
                el("div", { class: "warning-row" }, [
                    `no simulated series for "${entry.variable}"`,
                ]),
            );
        } else if (!recorded) {
            block.append(
                el("div", { class: "warning-row" }, [
                    `no recorded series for "${entry.variable}"`,
                ]),
            );
        } else {
            block.append(
                el("figure", {}, [
                    lineOverlay(recorded, sim),
                    el("figcaption", {}, ["recorded vs simulated"]),
                ]),
                el("div", { class: "histogram-pair" }, [
                    el("figure", {}, [
                        histogram(recorded, "real"),
                        el("figcaption", {}, ["recorded distribution"]),
                    ]),
                    el("figure", {}, [
                        histogram(sim, "sim"),
                        el("figcaption", {}, ["simulated distribution"]),
                    ]),
                ]),
            );
        }
        section.append(block);
    }
    return section;
}

export class ValidateView {
    private results = el("div", { class: "validate-results" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(this.form(), this.results);
        await this.loadStored();
    }

    private form(): HTMLElement {
        const mape = el("input", { type: "number", value: "0.2", step: "0.05", size: "5" });
        const ks = el("input", { type: "number", value: "0.3", step: "0.05", size: "5" });
        const run = el("button", { type: "button" }, ["Run validation"]);
        run.addEventListener("click", async () => {
            this.results.replaceChildren();
            try {
                const resp = await this.api.validate(this.session.projectId, {
                    mape_threshold: Number(mape.value),
                    ks_threshold: Number(ks.value),
                });
                await this.render(resp.report);
            } catch (err) {
                this.results.append(asBanner(err));
            }
        });
        return el("form", { class: "params-form" }, [
            el("label", {}, ["mape threshold ", mape]),
            el("label", {}, ["ks threshold ", ks]),
            run,
        ]);
    }

    private async loadStored(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "validation");
            await this.render(JSON.parse(text));
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.results.append(
                    emptyState("No validation report yet. Simulate first, then run validation."),
                );
            } else {
                this.results.append(asBanner(err));
            }
        }
    }

    private async render(report: ValidationReport): Promise<void> {
        // The overlays read both artifacts back rather than trusting any
        // client-side copy, so a reload always shows the stored state.
        let real: SeriesByName = {};
        let simulated: SeriesByName = {};
        try {
            real = parseSdlogCsv(
                await this.api.artifactText(this.session.projectId, "sdlog_all"),
            ).values;
            simulated = parseTraceCsv(
                await this.api.artifactText(this.session.projectId, "trace"),
            ).values;
        } catch (err) {
            this.results.append(asBanner(err));
        }
        this.results.append(validationSection(report, real, simulated));
    }
}
