/** Small DOM builders, enough structure to go without a framework. */

import { ApiError } from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        if (key === "class") {
            node.className = value;
        } else {
            node.setAttribute(key, value);
        }
    }
    node.append(...children);
    return node;
}

export function errorBanner(code: string, message: string): HTMLElement {
    return el("div", { class: "error-banner", role: "alert" }, [
        el("span", { class: "error-code" }, [code]),
        " ",
        message,
    ]);
}

/** Inline banner for a failed call; API errors keep their service code. */
export function asBanner(err: unknown): HTMLElement {
    if (err instanceof ApiError) {
        const extra = err.detail ? ` (${JSON.stringify(err.detail)})` : "";
        return errorBanner(err.code, err.message + extra);
    }
    return errorBanner("error", String(err));
}

export function emptyState(text: string): HTMLElement {
    return el("p", { class: "empty-state" }, [text]);
}

export function kvTable(rows: [string, string][]): HTMLTableElement {
    const table = el("table", { class: "kv-table" });
    for (const [key, value] of rows) {
        table.append(el("tr", {}, [el("th", {}, [key]), el("td", {}, [value])]));
    }
    return table;
}

/**
 * Numbers are shown the way the API sent them, trimmed for reading; this
 * formats a value, it never derives one.
 */
export function fmt(value: number | null | undefined): string {
    if (value === null || value === undefined) {
        return "n/a";
    }
    if (Number.isInteger(value)) {
        return String(value);
    }
    const abs = Math.abs(value);
    if (abs !== 0 && (abs < 1e-3 || abs >= 1e6)) {
        return value.toExponential(3);
    }
    return String(Math.round(value * 1e4) / 1e4);
}
