/**
 * Fit and simulate tab: fit element equations from the SD-log, run the
 * simulation, and inspect the trace series.
 */

import { ApiClient, ApiError, EquationEntry, EquationsPayload } from "../api.js";
import { lineChart } from "../charts.js";
import { parseTraceCsv, TraceData } from "../csv.js";
import { asBanner, el, emptyState, fmt } from "../dom.js";
import { UiSession } from "../session.js";

const POLICIES = ["replay", "hold_mean"];

export function equationText(entry: EquationEntry): string {
    if (entry.form === "replay") {
        return `replay of ${entry.variable}`;
    }
    if (entry.form === "constant") {
        return `= ${fmt(entry.value ?? 0)}`;
    }
    const parts = [fmt(entry.intercept ?? 0)];
    for (const term of entry.terms ?? []) {
        const power = term.power > 1 ? `^${term.power}` : "";
        parts.push(`${fmt(term.coefficient)} · ${term.element}[t-${term.lag}]${power}`);
    }
    return parts.join(" + ");
}

export function equationsTable(payload: EquationsPayload): HTMLElement {
    const table = el("table", { class: "equations-table" });
    table.append(
        el("tr", {}, [
            el("th", {}, ["element"]),
            el("th", {}, ["form"]),
            el("th", {}, ["equation"]),
            el("th", {}, ["flag"]),
        ]),
    );
    for (const entry of payload.equations) {
        table.append(
            el("tr", {}, [
                el("td", {}, [entry.element]),
                el("td", {}, [entry.form]),
                el("td", {}, [equationText(entry)]),
                el("td", { class: entry.flag ? "flagged" : "" }, [entry.flag ?? ""]),
            ]),
        );
    }
    return el("div", {}, [
        table,
        el("p", { class: "note" }, [`exogenous policy: ${payload.exogenous_policy}`]),
    ]);
}

export class SimulateView {
    private equationsBox = el("div", { class: "equations-box" });
    private traceBox = el("div", { class: "trace-box" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(
            this.fitForm(),
            this.equationsBox,
            this.simulateForm(),
            this.traceBox,
        );
        await Promise.all([this.loadEquations(), this.loadTrace()]);
    }

    private policySelect(): HTMLSelectElement {
        const select = el("select", { class: "policy-select" });
        for (const name of POLICIES) {
            select.append(el("option", { value: name }, [name]));
        }
        return select;
    }

    private fitForm(): HTMLElement {
        const policy = this.policySelect();
        const run = el("button", { type: "button" }, ["Fit equations"]);
        run.addEventListener("click", async () => {
            this.equationsBox.replaceChildren();
            try {
                const resp = await this.api.fitEquations(this.session.projectId, {
                    exogenous_policy: policy.value,
                });
                this.equationsBox.append(equationsTable(resp.equations));
            } catch (err) {
                this.equationsBox.append(asBanner(err));
            }
        });
        return el("form", { class: "params-form" }, [
            el("label", {}, ["exogenous policy ", policy]),
            run,
        ]);
    }

    private simulateForm(): HTMLElement {
        const horizon = el("input", {
            type: "number",
            min: "1",
            size: "6",
            placeholder: "default",
        });
        const policy = this.policySelect();
        const run = el("button", { type: "button" }, ["Run simulation"]);
        run.addEventListener("click", async () => {
            this.traceBox.replaceChildren();
            const params: { horizon?: number; exogenous_policy: string } = {
                exogenous_policy: policy.value,
            };
            if (horizon.value.trim() !== "") {
                params.horizon = Number(horizon.value);
            }
            try {
                const resp = await this.api.simulate(this.session.projectId, params);
                this.renderTrace(resp.trace);
            } catch (err) {
                this.traceBox.append(asBanner(err));
            }
        });
        return el("form", { class: "params-form" }, [
            el("label", {}, ["horizon (steps) ", horizon]),
            el("label", {}, ["exogenous policy ", policy]),
            run,
        ]);
    }

    private async loadEquations(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "equations");
            this.equationsBox.replaceChildren(equationsTable(JSON.parse(text)));
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.equationsBox.append(emptyState("No fitted equations yet."));
            } else {
                this.equationsBox.append(asBanner(err));
            }
        }
    }

    private async loadTrace(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "trace");
            this.renderTrace(parseTraceCsv(text));
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.traceBox.append(emptyState("No simulation trace yet."));
            } else {
                this.traceBox.append(asBanner(err));
            }
        }
    }

    private renderTrace(trace: TraceData & { notes?: string[] }): void {
        this.traceBox.replaceChildren();
        if (trace.elements.length === 0) {
            this.traceBox.append(emptyState("The trace is empty."));
            return;
        }
        const pick = el("select", {});
        for (const name of trace.elements) {
            pick.append(el("option", { value: name }, [name]));
        }
        const chartBox = el("div", { class: "series-chart" });
        const draw = () => {
            chartBox.replaceChildren(lineChart(trace.values[pick.value]));
        };
        pick.addEventListener("change", draw);
        this.traceBox.append(el("p", {}, ["element: ", pick]), chartBox);
        draw();
        for (const note of trace.notes ?? []) {
            this.traceBox.append(el("p", { class: "note" }, [note]));
        }
        this.traceBox.append(
            el("p", { class: "note" }, [
                el("a", { href: this.api.artifactUrl(this.session.projectId, "trace") }, [
                    "download trace CSV",
                ]),
            ]),
        );
    }
}
