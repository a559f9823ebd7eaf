/**
 * Event log tab: upload a CSV, then the stored summary. The summary panel
 * is refetched after every upload so what is shown is always the service's
 * own reading of the log.
 */

import { ApiClient, ApiError, LogSummary } from "../api.js";
import { asBanner, el, emptyState, kvTable, fmt } from "../dom.js";
import { UiSession } from "../session.js";

export function summaryTable(summary: LogSummary): HTMLTableElement {
    return kvTable([
        ["events", String(summary.num_events)],
        ["cases", String(summary.num_cases)],
        ["activities", String(summary.num_activities)],
        ["resources", String(summary.num_resources)],
        ["first start", summary.first_start],
        ["last completion", summary.last_complete],
        ["avg events per case", fmt(summary.avg_events_per_case)],
        ["avg case duration (min)", fmt(summary.avg_case_duration_minutes)],
    ]);
}

export class LogView {
    private summaryBox = el("div", { class: "summary-box" });
    private status = el("p", { class: "note" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(this.uploadForm(), this.status, this.summaryBox);
        await this.refreshSummary();
    }

    private uploadForm(): HTMLElement {
        const file = el("input", { type: "file", accept: ".csv,text/csv" });
        const paste = el("textarea", {
            rows: "5",
            cols: "70",
            placeholder: "or paste event log CSV here",
        });
        const strict = el("input", { type: "checkbox" });
        strict.checked = true;
        const upload = el("button", { type: "button" }, ["Upload log"]);
        upload.addEventListener("click", async () => {
            this.status.textContent = "";
            let csv = paste.value;
            if (file.files && file.files.length > 0) {
                csv = await file.files[0].text();
            }
            if (csv.trim() === "") {
                this.status.replaceChildren(asBanner(new Error("choose a file or paste CSV")));
                return;
            }
            try {
                const resp = await this.api.uploadLog(this.session.projectId, csv, strict.checked);
                this.status.textContent =
                    `stored ${resp.artifact.file} (version ${resp.artifact.version})`;
                await this.refreshSummary();
            } catch (err) {
                this.status.replaceChildren(asBanner(err));
            }
        });
        return el("form", { class: "params-form upload-form" }, [
            el("label", {}, ["event log CSV ", file]),
            paste,
            el("label", {}, [strict, " strict timestamp parsing"]),
            upload,
        ]);
    }

    private async refreshSummary(): Promise<void> {
        this.summaryBox.replaceChildren();
        try {
            const summary = await this.api.summary(this.session.projectId);
            this.summaryBox.append(
                el("h3", {}, ["Log summary"]),
                summaryTable(summary),
                el("p", { class: "note" }, [
                    el("a", { href: this.api.artifactUrl(this.session.projectId, "log") }, [
                        "download stored log",
                    ]),
                ]),
            );
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.summaryBox.append(emptyState("Upload an event log to begin."));
            } else {
                this.summaryBox.append(asBanner(err));
            }
        }
    }
}
