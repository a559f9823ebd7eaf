import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, Mapping } from "../src/api.js";
import { newSession } from "../src/session.js";
import { MappingEditor, ModelView, sfdGraph } from "../src/views/model.js";
import { FakeTransport, flush } from "./helpers.js";

const NODES = ["arrival_rate", "finish_rate", "num_in_process"];

function pickKind(editor: MappingEditor, node: string, kind: string): void {
    const select = editor.element.querySelector<HTMLSelectElement>(
        `select.kind-select[data-node="${node}"]`,
    )!;
    select.value = kind;
    select.dispatchEvent(new Event("change"));
}

describe("MappingEditor", () => {
    it("defaults every unseen node to an auxiliary", () => {
        const editor = new MappingEditor(NODES, {}, () => {});
        expect(editor.mapping()).toEqual({
            arrival_rate: { kind: "auxiliary" },
            finish_rate: { kind: "auxiliary" },
            num_in_process: { kind: "auxiliary" },
        });
    });

    it("emits only the fields each kind uses", () => {
        const editor = new MappingEditor(NODES, {}, () => {});
        pickKind(editor, "num_in_process", "stock");
        pickKind(editor, "finish_rate", "flow");
        pickKind(editor, "arrival_rate", "constant");

        const outflow = editor.element.querySelector<HTMLSelectElement>(
            'select.outflow-from-select[data-node="finish_rate"]',
        )!;
        outflow.value = "num_in_process";
        outflow.dispatchEvent(new Event("change"));

        expect(editor.mapping()).toEqual({
            arrival_rate: { kind: "constant", value: 0 },
            finish_rate: { kind: "flow", outflow_from: "num_in_process" },
            num_in_process: { kind: "stock", initial_value: 0 },
        });
    });

    it("lists current stocks in the attachment pickers after a kind change", () => {
        const editor = new MappingEditor(NODES, {}, () => {});
        pickKind(editor, "finish_rate", "flow");
        let options = Array.from(
            editor.element.querySelectorAll<HTMLOptionElement>(
                'select.inflow-to-select[data-node="finish_rate"] option',
            ),
        ).map((o) => o.value);
        expect(options).toEqual([""]);

        pickKind(editor, "num_in_process", "stock");
        options = Array.from(
            editor.element.querySelectorAll<HTMLOptionElement>(
                'select.inflow-to-select[data-node="finish_rate"] option',
            ),
        ).map((o) => o.value);
        expect(options).toEqual(["", "num_in_process"]);
    });

    it("keeps stock initial values typed into the form", () => {
        const editor = new MappingEditor(NODES, {}, () => {});
        pickKind(editor, "num_in_process", "stock");
        const input = editor.element.querySelector<HTMLInputElement>(
            'tr[data-node="num_in_process"] input[type=number]',
        )!;
        input.value = "7.5";
        input.dispatchEvent(new Event("change"));

        expect(editor.mapping().num_in_process).toEqual({ kind: "stock", initial_value: 7.5 });
    });
});

describe("sfdGraph", () => {
    it("draws stocks as boxes and flow pipes as solid edges", () => {
        const svg = sfdGraph({
            kind: "sfd",
            stocks: [{ name: "num_in_process", initial_value: 3 }],
            flows: [
                { name: "arrival_rate", inflow_to: "num_in_process", outflow_from: null },
                { name: "finish_rate", inflow_to: null, outflow_from: "num_in_process" },
            ],
            auxiliaries: ["load"],
            constants: [{ name: "capacity", value: 12 }],
            links: [
                { source: "load", target: "finish_rate", polarity: "+", lag: 1, kind: "linear" },
            ],
        });

        expect(svg.querySelectorAll("g.node")).toHaveLength(5);
        expect(svg.querySelectorAll("g.node rect")).toHaveLength(1);
        expect(svg.querySelectorAll("g.edge.pipe")).toHaveLength(2);
        const dashed = svg.querySelector("g.edge:not(.pipe) line")!;
        expect(dashed.getAttribute("stroke-dasharray")).not.toBeNull();
        expect(svg.textContent).toContain("+ lag 1");
    });
});

describe("ModelView", () => {
    let transport: FakeTransport;

    beforeEach(() => {
        transport = new FakeTransport();
    });

    async function mountView(): Promise<HTMLElement> {
        const container = document.createElement("div");
        const view = new ModelView(new ApiClient(transport.fetch), newSession("p1"));
        await view.mount(container);
        await flush();
        return container;
    }

    it("asks for a CLD first when no selection is stored", async () => {
        const container = await mountView();
        expect(container.querySelector(".empty-state")!.textContent).toContain("relations tab");
    });

    it("builds one editor row per node named in the stored selection", async () => {
        transport.onText(
            "GET",
            "/api/projects/p1/artifacts/selections",
            200,
            JSON.stringify({
                selections: [
                    { source: "arrival_rate", target: "num_in_process", lag: 0 },
                    { source: "finish_rate", target: "num_in_process", lag: 1 },
                ],
            }),
        );
        const container = await mountView();

        const rows = container.querySelectorAll("table.mapping-table tr[data-node]");
        expect(Array.from(rows).map((r) => r.getAttribute("data-node"))).toEqual([
            "arrival_rate",
            "finish_rate",
            "num_in_process",
        ]);
    });

    it("POSTs the drafted mapping and renders the returned model", async () => {
        transport.onText(
            "GET",
            "/api/projects/p1/artifacts/selections",
            200,
            JSON.stringify({
                selections: [{ source: "arrival_rate", target: "num_in_process", lag: 0 }],
            }),
        );
        transport.onJson("POST", "/api/projects/p1/sfd", 200, {
            artifact: { kind: "sfd", file: "artifacts/sfd.mdl", version: 1, created_at: "t" },
            sfd: {
                kind: "sfd",
                stocks: [{ name: "num_in_process", initial_value: 0 }],
                flows: [{ name: "arrival_rate", inflow_to: "num_in_process", outflow_from: null }],
                auxiliaries: [],
                constants: [],
                links: [],
            },
        });
        const container = await mountView();

        const kind = container.querySelector<HTMLSelectElement>(
            'select.kind-select[data-node="num_in_process"]',
        )!;
        kind.value = "stock";
        kind.dispatchEvent(new Event("change"));
        const flow = container.querySelector<HTMLSelectElement>(
            'select.kind-select[data-node="arrival_rate"]',
        )!;
        flow.value = "flow";
        flow.dispatchEvent(new Event("change"));
        const inflow = container.querySelector<HTMLSelectElement>(
            'select.inflow-to-select[data-node="arrival_rate"]',
        )!;
        inflow.value = "num_in_process";
        inflow.dispatchEvent(new Event("change"));

        container.querySelector<HTMLButtonElement>(".derive-sfd")!.click();
        await flush();

        const posts = transport.sent("POST", "/api/projects/p1/sfd");
        expect(posts).toHaveLength(1);
        expect(posts[0].body).toEqual({
            mapping: {
                arrival_rate: { kind: "flow", inflow_to: "num_in_process" },
                num_in_process: { kind: "stock", initial_value: 0 },
            },
        });
        expect(container.querySelectorAll(".sfd-box g.node")).toHaveLength(2);
        expect(container.querySelectorAll(".sfd-box g.edge.pipe")).toHaveLength(1);
    });

    it("surfaces the service's validation error verbatim", async () => {
        transport.onText(
            "GET",
            "/api/projects/p1/artifacts/selections",
            200,
            JSON.stringify({
                selections: [{ source: "arrival_rate", target: "num_in_process", lag: 0 }],
            }),
        );
        transport.onJson("POST", "/api/projects/p1/sfd", 422, {
            code: "mapping_error",
            message: "flow 'arrival_rate' attaches to no stock",
            detail: { element: "arrival_rate" },
        });
        const container = await mountView();

        container.querySelector<HTMLButtonElement>(".derive-sfd")!.click();
        await flush();

        const banner = container.querySelector(".sfd-box .error-banner")!;
        expect(banner.textContent).toContain("mapping_error");
        expect(banner.textContent).toContain("flow 'arrival_rate' attaches to no stock");
    });
});
