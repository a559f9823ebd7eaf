/**
 * Node-edge rendering on a fixed circle layout. A physics layout would give
 * a different picture on every reload, which breaks the rule that the same
 * artifacts always render the same view, so positions are a pure function
 * of node order.
 */

import { svgEl } from "./charts.js";

export interface GraphNode {
    id: string;
    shape?: "ellipse" | "box";
    sublabel?: string;
}

export interface GraphEdge {
    source: string;
    target: string;
    label?: string;
    cssClass?: string;
    dashed?: boolean;
}

const NODE_RX = 52;
const NODE_RY = 20;

let markerSeq = 0;

export class GraphView {
    constructor(
        private nodes: GraphNode[],
        private edges: GraphEdge[],
    ) {}

    render(): SVGSVGElement {
        const n = this.nodes.length;
        const radius = Math.max(90, n * 34);
        const size = 2 * (radius + NODE_RX + 24);
        const cx = size / 2;
        const cy = size / 2;

        const svg = svgEl("svg", {
            class: "graph",
            viewBox: `0 0 ${size} ${size}`,
            width: String(Math.min(size, 640)),
            role: "img",
        });
        const markerId = `arrow-${markerSeq++}`;
        svg.append(this.arrowDefs(markerId));

        const pos = new Map<string, { x: number; y: number }>();
        this.nodes.forEach((node, i) => {
            const angle = -Math.PI / 2 + (2 * Math.PI * i) / Math.max(n, 1);
            pos.set(node.id, {
                x: cx + radius * Math.cos(angle),
                y: cy + radius * Math.sin(angle),
            });
        });

        for (const edge of this.edges) {
            const from = pos.get(edge.source);
            const to = pos.get(edge.target);
            if (!from || !to) {
                continue;
            }
            svg.append(
                edge.source === edge.target
                    ? this.selfLoop(from, edge, markerId)
                    : this.link(from, to, edge, markerId),
            );
        }
        for (const node of this.nodes) {
            svg.append(this.nodeShape(node, pos.get(node.id)!));
        }
        return svg;
    }

    private arrowDefs(markerId: string): SVGDefsElement {
        const defs = svgEl("defs");
        const marker = svgEl("marker", {
            id: markerId,
            viewBox: "0 0 10 10",
            refX: "9",
            refY: "5",
            markerWidth: "7",
            markerHeight: "7",
            orient: "auto-start-reverse",
        });
        const tip = svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", class: "arrow-head" });
        marker.append(tip);
        defs.append(marker);
        return defs;
    }

    private link(
        from: { x: number; y: number },
        to: { x: number; y: number },
        edge: GraphEdge,
        markerId: string,
    ): SVGGElement {
        const g = svgEl("g", { class: `edge ${edge.cssClass ?? ""}`.trim() });
        const dx = to.x - from.x;
        const dy = to.y - from.y;
        const dist = Math.hypot(dx, dy) || 1;
        // trim both ends so the arrow tip meets the node outline
        const trim = (r: number) => ({ x: (dx / dist) * r, y: (dy / dist) * r });
        const a = trim(NODE_RY + 4);
        const b = trim(NODE_RY + 8);
        const line = svgEl("line", {
            x1: (from.x + a.x).toFixed(1),
            y1: (from.y + a.y).toFixed(1),
            x2: (to.x - b.x).toFixed(1),
            y2: (to.y - b.y).toFixed(1),
            "marker-end": `url(#${markerId})`,
        });
        if (edge.dashed) {
            line.setAttribute("stroke-dasharray", "5 3");
        }
        g.append(line);
        if (edge.label) {
            const label = svgEl("text", {
                class: "edge-label",
                x: ((from.x + to.x) / 2).toFixed(1),
                y: ((from.y + to.y) / 2 - 5).toFixed(1),
                "text-anchor": "middle",
            });
            label.textContent = edge.label;
            g.append(label);
        }
        return g;
    }

    private selfLoop(
        at: { x: number; y: number },
        edge: GraphEdge,
        markerId: string,
    ): SVGGElement {
        const g = svgEl("g", { class: `edge self ${edge.cssClass ?? ""}`.trim() });
        const path = svgEl("path", {
            d: `M ${at.x - 14} ${at.y - NODE_RY} C ${at.x - 40} ${at.y - NODE_RY - 46}, ` +
                `${at.x + 40} ${at.y - NODE_RY - 46}, ${at.x + 14} ${at.y - NODE_RY}`,
            fill: "none",
            "marker-end": `url(#${markerId})`,
        });
        g.append(path);
        if (edge.label) {
            const label = svgEl("text", {
                class: "edge-label",
                x: String(at.x),
                y: (at.y - NODE_RY - 38).toFixed(1),
                "text-anchor": "middle",
            });
            label.textContent = edge.label;
            g.append(label);
        }
        return g;
    }

    private nodeShape(node: GraphNode, at: { x: number; y: number }): SVGGElement {
        const g = svgEl("g", { class: "node", "data-node": node.id });
        if (node.shape === "box") {
            g.append(
                svgEl("rect", {
                    x: (at.x - NODE_RX).toFixed(1),
                    y: (at.y - NODE_RY).toFixed(1),
                    width: String(NODE_RX * 2),
                    height: String(NODE_RY * 2),
                }),
            );
        } else {
            g.append(
                svgEl("ellipse", {
                    cx: at.x.toFixed(1),
                    cy: at.y.toFixed(1),
                    rx: String(NODE_RX),
                    ry: String(NODE_RY),
                }),
            );
        }
        const label = svgEl("text", {
            x: at.x.toFixed(1),
            y: (at.y + (node.sublabel ? 0 : 4)).toFixed(1),
            "text-anchor": "middle",
        });
        label.textContent = node.id;
        g.append(label);
        if (node.sublabel) {
            const sub = svgEl("text", {
                class: "sublabel",
                x: at.x.toFixed(1),
                y: (at.y + 13).toFixed(1),
                "text-anchor": "middle",
            });
            sub.textContent = node.sublabel;
            g.append(sub);
        }
        return g;
    }
}
