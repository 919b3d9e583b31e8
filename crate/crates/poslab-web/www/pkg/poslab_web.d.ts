/* tslint:disable */
/* eslint-disable */

/**
 * Samples g on `[1, R/n]` and f on `[0, 1]` for `V = 1`, `m = 1/R`, with the
 * scalar bounds they interpolate between.
 */
export function bound_curves(n: number, ratio: number, s0: number, t0: number, samples: number): string;

/**
 * Solves a manufactured complex-dimension-one Monge-Ampere problem on a
 * `size x size` grid and returns the computed and exact potentials.
 */
export function ma_dim1(size: number, amplitude: number, seed: bigint): string;

/**
 * Thresholds, volume bounds and the log intersection profile of a pair of
 * classes on `(P^1)^n`, given by their coefficient vectors.
 */
export function split_pair(alpha: Float64Array, beta: Float64Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bound_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly ma_dim1: (a: number, b: number, c: bigint) => [number, number];
    readonly split_pair: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
