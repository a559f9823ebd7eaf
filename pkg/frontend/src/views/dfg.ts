/**
 * Process map tab: the directly-follows graph with transition counts, plus
 * start and end activity tallies.
 */

import { ApiClient, ApiError, Dfg } from "../api.js";
import { asBanner, el, emptyState } from "../dom.js";
import { GraphView } from "../graph.js";
import { UiSession } from "../session.js";

export function dfgGraph(dfg: Dfg): SVGSVGElement {
    const names = new Set<string>();
    for (const edge of dfg.edges) {
        names.add(edge.source);
        names.add(edge.target);
    }
    for (const name of Object.keys(dfg.start_activities)) {
        names.add(name);
    }
    for (const name of Object.keys(dfg.end_activities)) {
        names.add(name);
    }
    return new GraphView(
        [...names].sort().map((id) => ({ id })),
        dfg.edges.map((edge) => ({
            source: edge.source,
            target: edge.target,
            label: String(edge.count),
        })),
    ).render();
}

function tallyTable(title: string, tally: Record<string, number>): HTMLElement {
    const table = el("table", { class: "kv-table" });
    for (const [name, count] of Object.entries(tally)) {
        table.append(el("tr", {}, [el("th", {}, [name]), el("td", {}, [String(count)])]));
    }
    return el("div", { class: "tally" }, [el("h3", {}, [title]), table]);
}

export class DfgView {
    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        try {
            const dfg = await this.api.dfg(this.session.projectId);
            if (dfg.edges.length === 0 && Object.keys(dfg.start_activities).length === 0) {
                container.append(emptyState("The log produced an empty process map."));
                return;
            }
            container.append(
                dfgGraph(dfg),
                el("div", { class: "tally-row" }, [
                    tallyTable("Start activities", dfg.start_activities),
                    tallyTable("End activities", dfg.end_activities),
                ]),
            );
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                container.append(emptyState("Upload an event log first."));
            } else {
                container.append(asBanner(err));
            }
        }
    }
}
