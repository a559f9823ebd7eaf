/**
 * Per-tab view state. Nothing here is business data: a reload throws the
 * session away and every tab rebuilds itself from stored artifacts, so the
 * screen after refresh matches the session that produced it.
 */

import type { Mapping, RelationKey } from "./api.js";

export interface UiSession {
    projectId: string;
    selectedWindow: string;
    aspect: string;
    checkedRelations: RelationKey[];
    mappingDraft: Mapping;
}

export function newSession(projectId: string): UiSession {
    return {
        projectId,
        selectedWindow: "1h",
        aspect: "general",
        checkedRelations: [],
        mappingDraft: {},
    };
}

export function sameRelation(a: RelationKey, b: RelationKey): boolean {
    return a.source === b.source && a.target === b.target && a.lag === b.lag;
}
