/**
 * SD-log tab: pick a time window and aspect, build the step series, and
 * inspect the result. The table and chart read the stored CSV artifact back
 * from the service.
 */

import { ApiClient, ApiError } from "../api.js";
import { lineChart } from "../charts.js";
import { SdlogData, parseSdlogCsv } from "../csv.js";
import { asBanner, el, emptyState, fmt } from "../dom.js";
import { UiSession } from "../session.js";

const ASPECTS = ["general", "organizational", "activity"];
const PREVIEW_ROWS = 15;

export function sdlogTable(data: SdlogData): HTMLElement {
    const table = el("table", { class: "sdlog-table" });
    table.append(
        el("tr", {}, [
            el("th", {}, ["step start"]),
            el("th", {}, ["active"]),
            ...data.variables.map((v) => el("th", {}, [v])),
        ]),
    );
    data.stepStarts.slice(0, PREVIEW_ROWS).forEach((start, row) => {
        table.append(
            el("tr", { class: data.active[row] ? "" : "muted" }, [
                el("td", {}, [start]),
                el("td", {}, [data.active[row] ? "1" : "0"]),
                ...data.variables.map((v) => el("td", {}, [fmt(data.values[v][row])])),
            ]),
        );
    });
    const box = el("div", { class: "sdlog-box" }, [el("div", { class: "scroll-x" }, [table])]);
    if (data.stepStarts.length > PREVIEW_ROWS) {
        box.append(
            el("p", { class: "note" }, [
                `showing ${PREVIEW_ROWS} of ${data.stepStarts.length} steps`,
            ]),
        );
    }
    return box;
}

export class SdlogView {
    private results = el("div", { class: "sdlog-results" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(this.form(), this.results);
        await this.loadStored();
    }

    private form(): HTMLElement {
        const window = el("input", { type: "text", size: "6" });
        window.value = this.session.selectedWindow;
        window.addEventListener("change", () => {
            this.session.selectedWindow = window.value;
        });
        const aspect = el("select", {});
        for (const name of ASPECTS) {
            const option = el("option", { value: name }, [name]);
            if (name === this.session.aspect) {
                option.selected = true;
            }
            aspect.append(option);
        }
        aspect.addEventListener("change", () => {
            this.session.aspect = aspect.value;
        });
        const run = el("button", { type: "button" }, ["Build SD-log"]);
        run.addEventListener("click", async () => {
            this.results.replaceChildren();
            try {
                await this.api.buildSdlog(this.session.projectId, {
                    window: window.value,
                    aspect: aspect.value,
                });
                await this.loadStored();
            } catch (err) {
                this.results.append(asBanner(err));
            }
        });
        return el("form", { class: "params-form" }, [
            el("label", {}, ["time window ", window]),
            el("label", {}, ["aspect ", aspect]),
            run,
        ]);
    }

    private async loadStored(): Promise<void> {
        this.results.replaceChildren();
        let data: SdlogData;
        try {
            data = parseSdlogCsv(
                await this.api.artifactText(this.session.projectId, "sdlog_all"),
            );
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.results.append(emptyState("No SD-log yet. Build one above."));
            } else {
                this.results.append(asBanner(err));
            }
            return;
        }
        this.results.append(sdlogTable(data));

        // one small series chart; inactive leading/trailing steps included
        if (data.variables.length > 0) {
            const pick = el("select", {});
            for (const v of data.variables) {
                pick.append(el("option", { value: v }, [v]));
            }
            const chartBox = el("div", { class: "series-chart" });
            const draw = () => {
                chartBox.replaceChildren(lineChart(data.values[pick.value]));
            };
            pick.addEventListener("change", draw);
            this.results.append(el("p", {}, ["series: ", pick]), chartBox);
            draw();
        }

        this.results.append(
            el("p", { class: "note" }, [
                el("a", { href: this.api.artifactUrl(this.session.projectId, "sdlog_all") }, [
                    "download full CSV",
                ]),
                " · ",
                el("a", { href: this.api.artifactUrl(this.session.projectId, "sdlog_active") }, [
                    "download active steps CSV",
                ]),
            ]),
        );
    }
}
