/**
 * Model tab: map each CLD node onto a system-dynamics element kind and
 * derive the stock-and-flow diagram. The editor is a plain form (kind
 * dropdown per node plus attachment pickers) so service-side validation
 * errors point at exactly one row.
 */

import { ApiClient, ApiError, ElementDraft, Mapping, Sfd } from "../api.js";
import { asBanner, el, emptyState, fmt } from "../dom.js";
import { GraphView, GraphEdge, GraphNode } from "../graph.js";
import { UiSession } from "../session.js";

const KINDS = ["stock", "flow", "auxiliary", "constant"];

export class MappingEditor {
    readonly element: HTMLElement;
    private rows = el("table", { class: "mapping-table" });
    private submitButton: HTMLButtonElement;

    constructor(
        private nodes: string[],
        private draft: Mapping,
        onSubmit: (mapping: Mapping) => void,
    ) {
        for (const node of nodes) {
            if (!this.draft[node]) {
                this.draft[node] = { kind: "auxiliary" };
            }
        }
        this.submitButton = el("button", { type: "button", class: "derive-sfd" }, [
            "Derive SFD",
        ]);
        this.submitButton.addEventListener("click", () => onSubmit(this.mapping()));
        this.element = el("div", { class: "mapping-editor" }, [this.rows, this.submitButton]);
        this.renderRows();
    }

    /** Mapping exactly as the form stands; only fields the kind uses. */
    mapping(): Mapping {
        const out: Mapping = {};
        for (const node of this.nodes) {
            const entry = this.draft[node];
            const spec: ElementDraft = { kind: entry.kind };
            if (entry.kind === "stock") {
                spec.initial_value = entry.initial_value ?? 0;
            } else if (entry.kind === "flow") {
                if (entry.inflow_to) {
                    spec.inflow_to = entry.inflow_to;
                }
                if (entry.outflow_from) {
                    spec.outflow_from = entry.outflow_from;
                }
            } else if (entry.kind === "constant") {
                spec.value = entry.value ?? 0;
            }
            out[node] = spec;
        }
        return out;
    }

    private stocks(): string[] {
        return this.nodes.filter((node) => this.draft[node].kind === "stock");
    }

    // Attachment pickers list the nodes currently mapped as stocks, so any
    // kind change rebuilds every row.
    private renderRows(): void {
        this.rows.replaceChildren(
            el("tr", {}, [
                el("th", {}, ["node"]),
                el("th", {}, ["kind"]),
                el("th", {}, ["attachments"]),
                el("th", {}, ["value"]),
            ]),
        );
        for (const node of this.nodes) {
            const entry = this.draft[node];
            const kind = el("select", { class: "kind-select", "data-node": node });
            for (const name of KINDS) {
                const option = el("option", { value: name }, [name]);
                if (name === entry.kind) {
                    option.selected = true;
                }
                kind.append(option);
            }
            kind.addEventListener("change", () => {
                entry.kind = kind.value;
                this.renderRows();
            });
            this.rows.append(
                el("tr", { "data-node": node }, [
                    el("td", {}, [node]),
                    el("td", {}, [kind]),
                    this.attachmentCell(node, entry),
                    this.valueCell(entry),
                ]),
            );
        }
    }

    private attachmentCell(node: string, entry: ElementDraft): HTMLTableCellElement {
        const cell = el("td", {});
        if (entry.kind !== "flow") {
            return cell;
        }
        const stockOptions = this.stocks().filter((name) => name !== node);
        const pick = (
            label: string,
            current: string | undefined,
            apply: (value: string) => void,
        ) => {
            const select = el("select", { class: `${label}-select`, "data-node": node });
            select.append(el("option", { value: "" }, ["(none)"]));
            for (const name of stockOptions) {
                const option = el("option", { value: name }, [name]);
                if (name === current) {
                    option.selected = true;
                }
                select.append(option);
            }
            select.addEventListener("change", () => apply(select.value));
            cell.append(el("label", {}, [`${label.replace("-", " ")} `, select]));
        };
        pick("inflow-to", entry.inflow_to, (value) => {
            entry.inflow_to = value || undefined;
        });
        pick("outflow-from", entry.outflow_from, (value) => {
            entry.outflow_from = value || undefined;
        });
        return cell;
    }

    private valueCell(entry: ElementDraft): HTMLTableCellElement {
        const cell = el("td", {});
        if (entry.kind === "stock") {
            const input = el("input", { type: "number", step: "any", size: "8" });
            input.value = String(entry.initial_value ?? 0);
            input.addEventListener("change", () => {
                entry.initial_value = Number(input.value);
            });
            cell.append(el("label", {}, ["initial ", input]));
        } else if (entry.kind === "constant") {
            const input = el("input", { type: "number", step: "any", size: "8" });
            input.value = String(entry.value ?? 0);
            input.addEventListener("change", () => {
                entry.value = Number(input.value);
            });
            cell.append(el("label", {}, ["value ", input]));
        }
        return cell;
    }
}

export function sfdGraph(sfd: Sfd): SVGSVGElement {
    const nodes: GraphNode[] = [
        ...sfd.stocks.map((s) => ({
            id: s.name,
            shape: "box" as const,
            sublabel: `stock, init ${fmt(s.initial_value)}`,
        })),
        ...sfd.flows.map((f) => ({ id: f.name, sublabel: "flow" })),
        ...sfd.auxiliaries.map((name) => ({ id: name })),
        ...sfd.constants.map((c) => ({ id: c.name, sublabel: `const ${fmt(c.value)}` })),
    ];
    const edges: GraphEdge[] = [];
    for (const flow of sfd.flows) {
        if (flow.inflow_to) {
            edges.push({ source: flow.name, target: flow.inflow_to, cssClass: "pipe" });
        }
        if (flow.outflow_from) {
            edges.push({ source: flow.outflow_from, target: flow.name, cssClass: "pipe" });
        }
    }
    for (const link of sfd.links) {
        edges.push({
            source: link.source,
            target: link.target,
            label: link.lag > 0 ? `${link.polarity} lag ${link.lag}` : link.polarity,
            dashed: true,
        });
    }
    return new GraphView(nodes, edges).render();
}

export class ModelView {
    private editorBox = el("div", { class: "editor-box" });
    private resultBox = el("div", { class: "sfd-box" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(this.editorBox, this.resultBox);
        await this.load();
    }

    private async load(): Promise<void> {
        let nodes: string[];
        try {
            const text = await this.api.artifactText(this.session.projectId, "selections");
            const selections: { source: string; target: string }[] =
                JSON.parse(text).selections ?? [];
            const names = new Set<string>();
            for (const sel of selections) {
                names.add(sel.source);
                names.add(sel.target);
            }
            nodes = [...names].sort();
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.editorBox.append(
                    emptyState("Build a CLD on the relations tab first."),
                );
            } else {
                this.editorBox.append(asBanner(err));
            }
            return;
        }
        if (nodes.length === 0) {
            this.editorBox.append(emptyState("The stored selection has no nodes."));
            return;
        }

        if (Object.keys(this.session.mappingDraft).length === 0) {
            await this.seedDraftFromStored();
        }
        const editor = new MappingEditor(nodes, this.session.mappingDraft, (mapping) =>
            this.submit(mapping),
        );
        this.editorBox.replaceChildren(editor.element);
        await this.showStoredModel();
    }

    private async seedDraftFromStored(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "mapping");
            this.session.mappingDraft = JSON.parse(text);
        } catch {
            // no stored mapping, start from auxiliaries
        }
    }

    private async showStoredModel(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "sfd");
            this.resultBox.replaceChildren(
                el("h3", {}, ["Stored stock-and-flow model"]),
                el("pre", { class: "mdl-text" }, [text]),
                this.downloads(),
            );
        } catch {
            // nothing derived yet
        }
    }

    private downloads(): HTMLElement {
        return el("p", { class: "note" }, [
            el("a", { href: this.api.artifactUrl(this.session.projectId, "sfd") }, [
                "download .mdl",
            ]),
            " · ",
            el("a", { href: this.api.artifactUrl(this.session.projectId, "mapping") }, [
                "download mapping",
            ]),
        ]);
    }

    private async submit(mapping: Mapping): Promise<void> {
        this.resultBox.replaceChildren();
        try {
            const resp = await this.api.deriveSfd(this.session.projectId, mapping);
            this.resultBox.append(
                el("h3", {}, ["Stock-and-flow model"]),
                sfdGraph(resp.sfd),
                this.downloads(),
            );
        } catch (err) {
            this.resultBox.append(asBanner(err));
        }
    }
}
