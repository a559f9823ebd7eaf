/**
 * Decoders for the two CSV artifact bodies the views chart directly.
 * Values never contain commas or quotes, so a plain split is exact.
 */

export interface SdlogData {
    variables: string[];
    stepStarts: string[];
    active: boolean[];
    values: Record<string, number[]>;
}

/** Header: step_start,active,<variables...>; active is 0/1 per step. */
export function parseSdlogCsv(text: string): SdlogData {
    const lines = text.split("\n").filter((ln) => ln.trim() !== "");
    const header = lines[0].split(",");
    const variables = header.slice(2);
    const data: SdlogData = {
        variables,
        stepStarts: [],
        active: [],
        values: Object.fromEntries(variables.map((v) => [v, [] as number[]])),
    };
    for (const line of lines.slice(1)) {
        const cells = line.split(",");
        data.stepStarts.push(cells[0]);
        data.active.push(cells[1] === "1");
        variables.forEach((v, i) => data.values[v].push(Number(cells[i + 2])));
    }
    return data;
}

export interface TraceData {
    elements: string[];
    values: Record<string, number[]>;
}

/** Header: step,<elements...>; one row per simulated step. */
export function parseTraceCsv(text: string): TraceData {
    const lines = text.split("\n").filter((ln) => ln.trim() !== "");
    const elements = lines[0].split(",").slice(1);
    const values: Record<string, number[]> = Object.fromEntries(
        elements.map((e) => [e, [] as number[]]),
    );
    for (const line of lines.slice(1)) {
        const cells = line.split(",");
        elements.forEach((e, i) => values[e].push(Number(cells[i + 1])));
    }
    return { elements, values };
}
