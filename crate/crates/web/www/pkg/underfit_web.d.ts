/* tslint:disable */
/* eslint-disable */

/**
 * Generates a star, stairs or circles dataset and fits it.
 */
export function fit_demo(kind: string, structures: number, outlier_ratio: number, sigma: number, seed: number): string;

/**
 * Memberships of `m` data of which a fraction `inliers` sit close to the
 * model, tested against the uniform null.
 */
export function kuiper_demo(m: number, inliers: number, seed: number): string;

/**
 * Rank-`rank` extraction on the parts toy with optional uniform noise.
 */
export function nmu_demo(rank: number, noise: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fit_demo: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly kuiper_demo: (a: number, b: number, c: number) => [number, number];
    readonly nmu_demo: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
