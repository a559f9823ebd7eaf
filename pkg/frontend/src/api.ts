/**
 * Typed client for the pipeline service. Every number rendered anywhere in
 * the UI originates from one of these responses; the client never computes
 * statistics or model output of its own.
 */

export interface ArtifactRef {
    kind: string;
    file: string;
    version: number;
    created_at: string;
}

export interface LogSummary {
    num_events: number;
    num_cases: number;
    num_activities: number;
    num_resources: number;
    first_start: string;
    last_complete: string;
    avg_events_per_case: number;
    avg_case_duration_minutes: number;
}

export interface DfgEdge {
    source: string;
    target: string;
    count: number;
}

export interface Dfg {
    edges: DfgEdge[];
    start_activities: Record<string, number>;
    end_activities: Record<string, number>;
}

export interface SeriesScores {
    rmse: number;
    mape: number;
    mape_skipped: number;
}

export interface CandidateScore {
    label: string;
    k: number;
    active_fraction: number;
    per_variable: Record<string, SeriesScores>;
    aggregate_score: number | null;
    viable: boolean;
    reason: string | null;
}

export interface StabilityReport {
    model_kind: string;
    candidates: CandidateScore[];
    ranking: string[];
}

export interface RelationKey {
    source: string;
    target: string;
    lag: number;
}

export interface RelationCandidate extends RelationKey {
    kind: string;
    coefficient: number;
    polarity: string;
    strength: number;
    support: number;
    auto: boolean;
}

export interface RelationsPayload {
    skipped_constant: string[];
    candidates: RelationCandidate[];
}

export interface PairDetail {
    source: string;
    target: string;
    lag: number;
    support: number;
    pearson: number | null;
    spearman: number | null;
    fits: {
        linear: { slope: number; intercept: number; r2: number };
        quadratic: { a: number; b: number; c: number; r2: number };
    };
    points: [number, number][];
}

export interface CldEdge extends RelationKey {
    polarity: string;
    strength: number;
    kind: string;
}

export interface Cld {
    kind: "cld";
    nodes: string[];
    edges: CldEdge[];
}

export interface Sfd {
    kind: "sfd";
    stocks: { name: string; initial_value: number }[];
    flows: { name: string; inflow_to: string | null; outflow_from: string | null }[];
    auxiliaries: string[];
    constants: { name: string; value: number }[];
    links: { source: string; target: string; polarity: string; lag: number; kind: string }[];
}

export interface EquationTerm {
    element: string;
    lag: number;
    coefficient: number;
    power: number;
}

export interface EquationEntry {
    element: string;
    form: string;
    intercept?: number;
    terms?: EquationTerm[];
    variable?: string;
    value?: number;
    flag?: string;
}

export interface EquationsPayload {
    equations: EquationEntry[];
    exogenous_policy: string;
}

export interface Trace {
    elements: string[];
    horizon: number;
    values: Record<string, number[]>;
    notes: string[];
}

export interface VariableValidation {
    variable: string;
    rmse: number;
    mape: number;
    mape_skipped: number;
    mean_real: number;
    mean_sim: number;
    std_real: number;
    std_sim: number;
    ks_statistic: number;
    verdict: string;
}

export interface ValidationReport {
    variables: VariableValidation[];
    mape_threshold: number;
    ks_threshold: number;
    aligned_steps: number;
}

export interface ElementDraft {
    kind: string;
    inflow_to?: string;
    outflow_from?: string;
    initial_value?: number;
    value?: number;
}

export type Mapping = Record<string, ElementDraft>;

/** Error body the service returns for every 4xx: {code, message, detail}. */
export class ApiError extends Error {
    constructor(
        public status: number,
        public code: string,
        message: string,
        public detail: unknown = null,
    ) {
        super(message);
        this.name = "ApiError";
    }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
    // The transport is injectable so tests can script responses.
    constructor(
        private fetchFn: FetchLike = (input, init) => fetch(input, init),
        private base: string = "",
    ) {}

    private async request(method: string, path: string, body?: unknown): Promise<any> {
        const init: RequestInit = { method };
        if (body !== undefined) {
            init.headers = { "content-type": "application/json" };
            init.body = JSON.stringify(body);
        }
        const resp = await this.fetchFn(this.base + path, init);
        if (!resp.ok) {
            throw await this.toError(resp, method, path);
        }
        return resp.json();
    }

    private async toError(resp: Response, method: string, path: string): Promise<ApiError> {
        let payload: any = null;
        try {
            payload = await resp.json();
        } catch {
            // non-JSON error body, keep the generic code
        }
        return new ApiError(
            resp.status,
            payload?.code ?? "http_error",
            payload?.message ?? `${method} ${path} failed with status ${resp.status}`,
            payload?.detail ?? null,
        );
    }

    listProjects(): Promise<{ projects: { id: string }[] }> {
        return this.request("GET", "/api/projects");
    }

    createProject(id: string): Promise<{ id: string }> {
        return this.request("POST", "/api/projects", { id });
    }

    uploadLog(
        pid: string,
        csv: string,
        strict = true,
    ): Promise<{ artifact: ArtifactRef }> {
        return this.request("POST", `/api/projects/${pid}/log`, { csv, strict });
    }

    summary(pid: string): Promise<LogSummary> {
        return this.request("GET", `/api/projects/${pid}/summary`);
    }

    dfg(pid: string): Promise<Dfg> {
        return this.request("GET", `/api/projects/${pid}/dfg`);
    }

    buildSdlog(
        pid: string,
        params: { window: string; aspect: string; entities?: string[] },
    ): Promise<{ artifact: ArtifactRef; active_artifact: ArtifactRef | null }> {
        return this.request("POST", `/api/projects/${pid}/sdlog`, params);
    }

    assessWindows(
        pid: string,
        params: { candidates: string[]; model: string; split_ratio?: number },
    ): Promise<{ artifact: ArtifactRef; stability: StabilityReport }> {
        return this.request("POST", `/api/projects/${pid}/windows`, params);
    }

    detectRelations(
        pid: string,
        params: { max_lag?: number; threshold?: number; min_support?: number },
    ): Promise<{ artifact: ArtifactRef; relations: RelationsPayload }> {
        return this.request("POST", `/api/projects/${pid}/relations`, params);
    }

    storedRelations(pid: string): Promise<RelationsPayload> {
        return this.request("GET", `/api/projects/${pid}/relations`);
    }

    pairDetail(pid: string, key: RelationKey): Promise<PairDetail> {
        return this.request("POST", `/api/projects/${pid}/pair-detail`, key);
    }

    buildCld(
        pid: string,
        selections: RelationKey[],
    ): Promise<{ artifact: ArtifactRef; cld: Cld }> {
        return this.request("POST", `/api/projects/${pid}/cld`, { selections });
    }

    deriveSfd(
        pid: string,
        mapping: Mapping,
    ): Promise<{ artifact: ArtifactRef; sfd: Sfd }> {
        return this.request("POST", `/api/projects/${pid}/sfd`, { mapping });
    }

    fitEquations(
        pid: string,
        params: { exogenous_policy?: string },
    ): Promise<{ artifact: ArtifactRef; equations: EquationsPayload }> {
        return this.request("POST", `/api/projects/${pid}/fit`, params);
    }

    simulate(
        pid: string,
        params: { horizon?: number; exogenous_policy?: string },
    ): Promise<{ artifact: ArtifactRef; trace: Trace }> {
        return this.request("POST", `/api/projects/${pid}/simulate`, params);
    }

    validate(
        pid: string,
        params: { variables?: string[]; mape_threshold?: number; ks_threshold?: number },
    ): Promise<{ artifact: ArtifactRef; report: ValidationReport }> {
        return this.request("POST", `/api/projects/${pid}/validate`, params);
    }

    artifactUrl(pid: string, kind: string): string {
        return `${this.base}/api/projects/${pid}/artifacts/${kind}`;
    }

    /** Raw artifact body, used for CSV artifacts the views table or chart. */
    async artifactText(pid: string, kind: string): Promise<string> {
        const resp = await this.fetchFn(this.artifactUrl(pid, kind));
        if (!resp.ok) {
            throw await this.toError(resp, "GET", this.artifactUrl(pid, kind));
        }
        return resp.text();
    }
}
