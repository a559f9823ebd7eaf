/** Scripted fetch stand-in: tests register routes and inspect requests. */

export interface Recorded {
    url: string;
    method: string;
    body: unknown;
}

type Handler = { method: string; url: string; respond: () => Response };

export function jsonResponse(status: number, payload: unknown): Response {
    return new Response(JSON.stringify(payload), {
        status,
        headers: { "content-type": "application/json" },
    });
}

export function textResponse(status: number, text: string): Response {
    return new Response(text, { status, headers: { "content-type": "text/plain" } });
}

export class FakeTransport {
    requests: Recorded[] = [];
    private handlers: Handler[] = [];

    on(method: string, url: string, respond: () => Response): this {
        this.handlers.push({ method, url, respond });
        return this;
    }

    onJson(method: string, url: string, status: number, payload: unknown): this {
        return this.on(method, url, () => jsonResponse(status, payload));
    }

    onText(method: string, url: string, status: number, text: string): this {
        return this.on(method, url, () => textResponse(status, text));
    }

    fetch = async (url: string, init?: RequestInit): Promise<Response> => {
        const method = init?.method ?? "GET";
        const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
        this.requests.push({ url, method, body });
        const handler = this.handlers.find((h) => h.method === method && h.url === url);
        if (!handler) {
            return jsonResponse(404, {
                code: "missing_input",
                message: `no scripted route for ${method} ${url}`,
                detail: null,
            });
        }
        return handler.respond();
    };

    sent(method: string, url: string): Recorded[] {
        return this.requests.filter((r) => r.method === method && r.url === url);
    }
}

/** Let queued promise callbacks (event handlers are async) settle. */
export function flush(): Promise<void> {
    return new Promise((resolve) => setTimeout(resolve, 0));
}
