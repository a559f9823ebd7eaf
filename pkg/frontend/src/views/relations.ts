/**
 * Relation candidates tab: detection parameters, the candidate table with
 * checkboxes, per-pair diagnostics, and CLD submission. The submit body
 * lists exactly the checked rows and the button stays disabled while the
 * selection is empty, so an empty submission never reaches the service.
 */

import {
    ApiClient,
    ApiError,
    Cld,
    PairDetail,
    RelationCandidate,
    RelationKey,
    RelationsPayload,
} from "../api.js";
import { svgEl } from "../charts.js";
import { asBanner, el, emptyState, fmt, kvTable } from "../dom.js";
import { GraphView } from "../graph.js";
import { UiSession, sameRelation } from "../session.js";

export class RelationTable {
    readonly element: HTMLElement;
    private boxes: HTMLInputElement[] = [];
    private submitButton: HTMLButtonElement;

    constructor(
        private candidates: RelationCandidate[],
        onSubmit: (selections: RelationKey[]) => void,
        options: {
            onDetail?: (key: RelationKey) => void;
            onToggle?: (selections: RelationKey[]) => void;
            preChecked?: RelationKey[];
        } = {},
    ) {
        const table = el("table", { class: "relation-table" });
        table.append(
            el("tr", {}, [
                el("th", {}, [""]),
                el("th", {}, ["source"]),
                el("th", {}, ["target"]),
                el("th", {}, ["lag"]),
                el("th", {}, ["kind"]),
                el("th", {}, ["strength"]),
                el("th", {}, ["polarity"]),
                el("th", {}, ["support"]),
                el("th", {}, [""]),
            ]),
        );
        for (const cand of candidates) {
            const box = el("input", { type: "checkbox" });
            const key = { source: cand.source, target: cand.target, lag: cand.lag };
            if ((options.preChecked ?? []).some((k) => sameRelation(k, key))) {
                box.checked = true;
            }
            box.addEventListener("change", () => {
                this.refreshGuard();
                options.onToggle?.(this.selections());
            });
            this.boxes.push(box);
            const row = el("tr", { class: cand.auto ? "auto-relation" : "" }, [
                el("td", {}, [box]),
                el("td", {}, [cand.source]),
                el("td", {}, [cand.target]),
                el("td", {}, [String(cand.lag)]),
                el("td", {}, [cand.kind]),
                el("td", {}, [fmt(cand.strength)]),
                el("td", {}, [cand.polarity]),
                el("td", {}, [String(cand.support)]),
            ]);
            const detailCell = el("td", {});
            if (options.onDetail) {
                const button = el("button", { type: "button", class: "detail-button" }, ["detail"]);
                button.addEventListener("click", () => options.onDetail!(key));
                detailCell.append(button);
            }
            row.append(detailCell);
            table.append(row);
        }

        this.submitButton = el("button", { type: "button", class: "submit-selection" }, [
            "Build CLD from selection",
        ]);
        this.submitButton.addEventListener("click", () => onSubmit(this.selections()));

        this.element = el("div", { class: "relation-picker" }, [table, this.submitButton]);
        this.refreshGuard();
    }

    /** Exactly the checked subset, in table order. */
    selections(): RelationKey[] {
        const out: RelationKey[] = [];
        this.boxes.forEach((box, i) => {
            if (box.checked) {
                const cand = this.candidates[i];
                out.push({ source: cand.source, target: cand.target, lag: cand.lag });
            }
        });
        return out;
    }

    private refreshGuard(): void {
        this.submitButton.disabled = this.selections().length === 0;
    }
}

export function cldGraph(cld: Cld): SVGSVGElement {
    return new GraphView(
        cld.nodes.map((id) => ({ id })),
        cld.edges.map((edge) => ({
            source: edge.source,
            target: edge.target,
            label: edge.lag > 0 ? `${edge.polarity} lag ${edge.lag}` : edge.polarity,
            dashed: edge.kind === "nonlinear",
        })),
    ).render();
}

function scatter(points: [number, number][]): SVGSVGElement {
    const w = 220;
    const h = 160;
    const svg = svgEl("svg", {
        class: "scatter",
        viewBox: `0 0 ${w} ${h}`,
        width: String(w),
        height: String(h),
        role: "img",
    });
    if (points.length === 0) {
        return svg;
    }
    const xs = points.map((p) => p[0]);
    const ys = points.map((p) => p[1]);
    const xlo = Math.min(...xs);
    const xspan = Math.max(...xs) - xlo || 1;
    const ylo = Math.min(...ys);
    const yspan = Math.max(...ys) - ylo || 1;
    for (const [x, y] of points) {
        svg.append(
            svgEl("circle", {
                class: "point",
                cx: (6 + ((x - xlo) / xspan) * (w - 12)).toFixed(1),
                cy: (h - 6 - ((y - ylo) / yspan) * (h - 12)).toFixed(1),
                r: "2.5",
            }),
        );
    }
    return svg;
}

export function pairDetailPanel(detail: PairDetail): HTMLElement {
    const lin = detail.fits.linear;
    const quad = detail.fits.quadratic;
    return el("div", { class: "pair-detail" }, [
        el("h3", {}, [`${detail.source} → ${detail.target} (lag ${detail.lag})`]),
        kvTable([
            ["support", String(detail.support)],
            ["pearson", fmt(detail.pearson)],
            ["spearman", fmt(detail.spearman)],
            ["linear fit", `slope ${fmt(lin.slope)}, intercept ${fmt(lin.intercept)}, r2 ${fmt(lin.r2)}`],
            ["quadratic fit", `a ${fmt(quad.a)}, b ${fmt(quad.b)}, c ${fmt(quad.c)}, r2 ${fmt(quad.r2)}`],
        ]),
        scatter(detail.points),
    ]);
}

export class RelationsView {
    private results = el("div", { class: "relation-results" });
    private detailBox = el("div", { class: "detail-box" });
    private cldBox = el("div", { class: "cld-box" });

    constructor(
        private api: ApiClient,
        private session: UiSession,
    ) {}

    async mount(container: HTMLElement): Promise<void> {
        container.append(this.paramsForm(), this.results, this.detailBox, this.cldBox);
        await this.loadStored();
    }

    private paramsForm(): HTMLElement {
        const maxLag = el("input", { type: "number", value: "5", min: "0", size: "4" });
        const threshold = el("input", { type: "number", value: "0.7", step: "0.05", size: "5" });
        const minSupport = el("input", { type: "number", value: "10", min: "2", size: "4" });
        const run = el("button", { type: "button" }, ["Detect relations"]);
        run.addEventListener("click", async () => {
            this.results.replaceChildren();
            try {
                const resp = await this.api.detectRelations(this.session.projectId, {
                    max_lag: Number(maxLag.value),
                    threshold: Number(threshold.value),
                    min_support: Number(minSupport.value),
                });
                this.session.checkedRelations = [];
                this.renderPayload(resp.relations);
            } catch (err) {
                this.results.append(asBanner(err));
            }
        });
        return el("form", { class: "params-form" }, [
            el("label", {}, ["max lag ", maxLag]),
            el("label", {}, ["strength threshold ", threshold]),
            el("label", {}, ["min support ", minSupport]),
            run,
        ]);
    }

    private async loadStored(): Promise<void> {
        let payload: RelationsPayload;
        try {
            payload = await this.api.storedRelations(this.session.projectId);
        } catch (err) {
            if (err instanceof ApiError && err.code === "missing_input") {
                this.results.append(
                    emptyState("No relation scan stored yet. Run detection above."),
                );
            } else {
                this.results.append(asBanner(err));
            }
            return;
        }
        if (this.session.checkedRelations.length === 0) {
            this.session.checkedRelations = await this.storedSelections();
        }
        this.renderPayload(payload);
        await this.showStoredCld();
    }

    // The parsed graph only comes back on the POST that builds it; after a
    // reload the stored .mdl text stands in for it.
    private async showStoredCld(): Promise<void> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "cld");
            this.cldBox.replaceChildren(
                el("h3", {}, ["Stored causal loop diagram"]),
                el("pre", { class: "mdl-text" }, [text]),
            );
        } catch {
            // none built yet
        }
    }

    /** Previously submitted selection, so a reload shows the same checks. */
    private async storedSelections(): Promise<RelationKey[]> {
        try {
            const text = await this.api.artifactText(this.session.projectId, "selections");
            return JSON.parse(text).selections ?? [];
        } catch {
            return [];
        }
    }

    private renderPayload(payload: RelationsPayload): void {
        this.results.replaceChildren();
        if (payload.skipped_constant.length > 0) {
            this.results.append(
                el("p", { class: "note" }, [
                    `constant variables skipped: ${payload.skipped_constant.join(", ")}`,
                ]),
            );
        }
        if (payload.candidates.length === 0) {
            this.results.append(emptyState("No relation candidates above the threshold."));
            return;
        }
        const table = new RelationTable(
            payload.candidates,
            (selections) => this.submit(selections),
            {
                onDetail: (key) => this.showDetail(key),
                onToggle: (selections) => {
                    this.session.checkedRelations = selections;
                },
                preChecked: this.session.checkedRelations,
            },
        );
        this.results.append(table.element);
    }

    private async showDetail(key: RelationKey): Promise<void> {
        this.detailBox.replaceChildren();
        try {
            const detail = await this.api.pairDetail(this.session.projectId, key);
            this.detailBox.append(pairDetailPanel(detail));
        } catch (err) {
            this.detailBox.append(asBanner(err));
        }
    }

    private async submit(selections: RelationKey[]): Promise<void> {
        this.cldBox.replaceChildren();
        try {
            const resp = await this.api.buildCld(this.session.projectId, selections);
            this.cldBox.append(
                el("h3", {}, ["Causal loop diagram"]),
                cldGraph(resp.cld),
                el("p", { class: "note" }, [
                    el("a", { href: this.api.artifactUrl(this.session.projectId, "cld") }, [
                        "download .mdl",
                    ]),
                ]),
            );
        } catch (err) {
            this.cldBox.append(asBanner(err));
        }
    }
}
