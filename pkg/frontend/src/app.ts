/**
 * Shell: hash routing over the eight pipeline tabs plus a project picker.
 * The hash carries project id and tab, so a reload lands on the same screen
 * and every tab rebuilds itself from stored artifacts.
 */

import { ApiClient } from "./api.js";
import { asBanner, el } from "./dom.js";
import { UiSession, newSession } from "./session.js";
import { DfgView } from "./views/dfg.js";
import { LogView } from "./views/log.js";
import { ModelView } from "./views/model.js";
import { RelationsView } from "./views/relations.js";
import { SdlogView } from "./views/sdlog.js";
import { SimulateView } from "./views/simulate.js";
import { ValidateView } from "./views/validate.js";
import { WindowsView } from "./views/windows.js";

interface TabView {
    mount(container: HTMLElement): Promise<void>;
}

type ViewFactory = (api: ApiClient, session: UiSession) => TabView;

/** Pipeline order; one route per tab. */
export const TABS: { id: string; label: string; make: ViewFactory }[] = [
    { id: "log", label: "Event log", make: (a, s) => new LogView(a, s) },
    { id: "dfg", label: "Process map", make: (a, s) => new DfgView(a, s) },
    { id: "sdlog", label: "SD-log", make: (a, s) => new SdlogView(a, s) },
    { id: "windows", label: "Window stability", make: (a, s) => new WindowsView(a, s) },
    { id: "relations", label: "Relations", make: (a, s) => new RelationsView(a, s) },
    { id: "model", label: "CLD / SFD", make: (a, s) => new ModelView(a, s) },
    { id: "simulate", label: "Fit & simulate", make: (a, s) => new SimulateView(a, s) },
    { id: "validate", label: "Validate", make: (a, s) => new ValidateView(a, s) },
];

export interface Route {
    pid: string | null;
    tab: string;
}

/** "#/<project>/<tab>"; missing pieces fall back to the picker / first tab. */
export function parseHash(hash: string): Route {
    const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p !== "");
    if (parts.length === 0) {
        return { pid: null, tab: TABS[0].id };
    }
    const pid = decodeURIComponent(parts[0]);
    const tab = TABS.some((t) => t.id === parts[1]) ? parts[1] : TABS[0].id;
    return { pid, tab };
}

export function hashFor(pid: string, tab: string): string {
    return `#/${encodeURIComponent(pid)}/${tab}`;
}

class App {
    private session: UiSession | null = null;

    constructor(
        private api: ApiClient,
        private header: HTMLElement,
        private main: HTMLElement,
    ) {}

    async route(): Promise<void> {
        const { pid, tab } = parseHash(location.hash);
        this.main.replaceChildren();
        if (pid === null) {
            this.header.replaceChildren();
            await this.picker();
            return;
        }
        if (!this.session || this.session.projectId !== pid) {
            this.session = newSession(pid);
        }
        this.renderNav(pid, tab);
        const entry = TABS.find((t) => t.id === tab)!;
        try {
            await entry.make(this.api, this.session).mount(this.main);
        } catch (err) {
            this.main.append(asBanner(err));
        }
    }

    private renderNav(pid: string, active: string): void {
        const nav = el("nav", { class: "tabs" });
        for (const tab of TABS) {
            nav.append(
                el(
                    "a",
                    {
                        href: hashFor(pid, tab.id),
                        class: tab.id === active ? "tab active" : "tab",
                    },
                    [tab.label],
                ),
            );
        }
        this.header.replaceChildren(
            el("div", { class: "project-line" }, [
                el("span", { class: "project-name" }, [`project: ${pid}`]),
                " ",
                el("a", { href: "#/", class: "switch-project" }, ["switch"]),
            ]),
            nav,
        );
    }

    private async picker(): Promise<void> {
        const box = el("div", { class: "picker" }, [el("h2", {}, ["Projects"])]);
        this.main.append(box);
        try {
            const listing = await this.api.listProjects();
            if (listing.projects.length === 0) {
                box.append(el("p", { class: "empty-state" }, ["No projects yet."]));
            }
            const list = el("ul", { class: "project-list" });
            for (const project of listing.projects) {
                list.append(
                    el("li", {}, [
                        el("a", { href: hashFor(project.id, TABS[0].id) }, [project.id]),
                    ]),
                );
            }
            box.append(list);
        } catch (err) {
            box.append(asBanner(err));
        }

        const name = el("input", { type: "text", placeholder: "project id" });
        const create = el("button", { type: "button" }, ["Create"]);
        create.addEventListener("click", async () => {
            try {
                const resp = await this.api.createProject(name.value.trim());
                location.hash = hashFor(resp.id, TABS[0].id);
            } catch (err) {
                box.append(asBanner(err));
            }
        });
        box.append(el("form", { class: "params-form" }, [name, create]));
    }
}

function boot(): void {
    const header = document.getElementById("header");
    const main = document.getElementById("app");
    if (!header || !main) {
        return;
    }
    const app = new App(new ApiClient(), header, main);
    window.addEventListener("hashchange", () => void app.route());
    void app.route();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
    boot();
} else if (typeof document !== "undefined") {
    document.addEventListener("DOMContentLoaded", boot);
}
