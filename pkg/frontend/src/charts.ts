/**
 * Hand-rolled SVG charts. No chart library: the views need deterministic
 * output (same payload, same markup) and the data volumes are tiny.
 *
 * Charts only position values taken from API responses. Scaling to pixels
 * and histogram bin counts are geometry; no derived number is printed as
 * text that was not already in the payload.
 */

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
    const node = document.createElementNS(SVG_NS, tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    return node;
}

export interface BarGroup {
    label: string;
    muted: boolean;
    bars: { variable: string; value: number }[];
}

const BAR_W = 18;
const BAR_GAP = 4;
const GROUP_GAP = 28;
const CHART_H = 160;
const LABEL_H = 18;

/**
 * One bar per (group, bar) pair, groups side by side. Muted groups render
 * grey. Heights are normalized against the largest value in the chart.
 */
export function barChart(groups: BarGroup[]): SVGSVGElement {
    let maxValue = 0;
    for (const group of groups) {
        for (const bar of group.bars) {
            if (Number.isFinite(bar.value) && bar.value > maxValue) {
                maxValue = bar.value;
            }
        }
    }
    const scale = maxValue > 0 ? CHART_H / maxValue : 0;

    let x = GROUP_GAP / 2;
    const svg = svgEl("svg", { class: "bar-chart", role: "img" });
    for (const group of groups) {
        const groupStart = x;
        for (const bar of group.bars) {
            const h = Number.isFinite(bar.value) ? Math.max(bar.value * scale, 1) : 1;
            const rect = svgEl("rect", {
                class: group.muted ? "bar non-viable" : "bar",
                x: String(x),
                y: String(CHART_H - h),
                width: String(BAR_W),
                height: String(h),
                "data-candidate": group.label,
                "data-variable": bar.variable,
            });
            const title = svgEl("title");
            title.textContent = `${group.label} / ${bar.variable}: ${bar.value}`;
            rect.append(title);
            svg.append(rect);
            x += BAR_W + BAR_GAP;
        }
        const width = Math.max(x - BAR_GAP - groupStart, BAR_W);
        const label = svgEl("text", {
            class: group.muted ? "group-label muted" : "group-label",
            x: String(groupStart + width / 2),
            y: String(CHART_H + LABEL_H - 4),
            "text-anchor": "middle",
        });
        label.textContent = group.label;
        svg.append(label);
        x += GROUP_GAP;
    }
    const total = Math.max(x - GROUP_GAP / 2, BAR_W);
    svg.setAttribute("viewBox", `0 0 ${total} ${CHART_H + LABEL_H}`);
    svg.setAttribute("width", String(total));
    svg.setAttribute("height", String(CHART_H + LABEL_H));
    return svg;
}

const LINE_W = 420;
const LINE_H = 140;

function polylinePoints(series: number[], lo: number, span: number): string {
    const stepX = series.length > 1 ? LINE_W / (series.length - 1) : 0;
    return series
        .map((v, i) => {
            const y = LINE_H - ((v - lo) / span) * LINE_H;
            return `${(i * stepX).toFixed(2)},${y.toFixed(2)}`;
        })
        .join(" ");
}

/** Real and simulated series over the same x axis; classes .real and .sim. */
export function lineOverlay(real: number[], simulated: number[]): SVGSVGElement {
    const all = [...real, ...simulated].filter(Number.isFinite);
    const lo = all.length ? Math.min(...all) : 0;
    const hi = all.length ? Math.max(...all) : 1;
    const span = hi - lo || 1;

    const svg = svgEl("svg", {
        class: "line-overlay",
        viewBox: `0 0 ${LINE_W} ${LINE_H}`,
        width: String(LINE_W),
        height: String(LINE_H),
        role: "img",
    });
    for (const [series, cls] of [
        [real, "line real"],
        [simulated, "line sim"],
    ] as [number[], string][]) {
        if (series.length === 0) {
            continue;
        }
        svg.append(
            svgEl("polyline", {
                class: cls,
                points: polylinePoints(series, lo, span),
                fill: "none",
            }),
        );
    }
    return svg;
}

/** Single series, same geometry as the overlay. */
export function lineChart(series: number[]): SVGSVGElement {
    return lineOverlay(series, []);
}

const HIST_BINS = 10;
const HIST_W = 200;
const HIST_H = 100;

/**
 * Value distribution of one series. Bin counts set bar heights only; the
 * text on the chart is limited to the series' own extremes.
 */
export function histogram(values: number[], cssClass: string): SVGSVGElement {
    const svg = svgEl("svg", {
        class: `histogram ${cssClass}`,
        viewBox: `0 0 ${HIST_W} ${HIST_H + LABEL_H}`,
        width: String(HIST_W),
        height: String(HIST_H + LABEL_H),
        role: "img",
    });
    const finite = values.filter(Number.isFinite);
    if (finite.length === 0) {
        return svg;
    }
    const lo = Math.min(...finite);
    const hi = Math.max(...finite);
    const span = hi - lo || 1;
    const counts = new Array(HIST_BINS).fill(0);
    for (const v of finite) {
        const bin = Math.min(Math.floor(((v - lo) / span) * HIST_BINS), HIST_BINS - 1);
        counts[bin] += 1;
    }
    const peak = Math.max(...counts);
    const binW = HIST_W / HIST_BINS;
    counts.forEach((count, i) => {
        if (count === 0) {
            return;
        }
        const h = (count / peak) * HIST_H;
        svg.append(
            svgEl("rect", {
                class: "hist-bar",
                x: (i * binW).toFixed(2),
                y: (HIST_H - h).toFixed(2),
                width: (binW - 1).toFixed(2),
                height: h.toFixed(2),
            }),
        );
    });
    const left = svgEl("text", {
        class: "axis-label",
        x: "0",
        y: String(HIST_H + LABEL_H - 4),
    });
    left.textContent = String(lo);
    const right = svgEl("text", {
        class: "axis-label",
        x: String(HIST_W),
        y: String(HIST_H + LABEL_H - 4),
        "text-anchor": "end",
    });
    right.textContent = String(hi);
    svg.append(left, right);
    return svg;
}
