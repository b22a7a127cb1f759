/* tslint:disable */
/* eslint-disable */

export function builtin_names(): string;

/**
 * `H(t,x,.)` on `[-5, 5]` and its numeric transform next to the closed form.
 */
export function conjugate_plot(name: string, t: number, x: number): string;

/**
 * Hull of `points` (JSON `[[x, y], ...]`), `P(y, K)` and the Steiner point
 * of the projection.
 */
export function proj_map(points: string, yx: number, yy: number): string;

/**
 * Control samples of the built triple at `(t, x)`, their images `e(a)`
 * and `H` against the reconstruction `max_a { p f - l }`.
 */
export function representation(name: string, t: number, x: number, compact: boolean): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly builtin_names: () => [number, number];
    readonly conjugate_plot: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly proj_map: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly representation: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
