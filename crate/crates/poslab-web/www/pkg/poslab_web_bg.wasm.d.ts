/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const bound_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const ma_dim1: (a: number, b: number, c: bigint) => [number, number];
export const split_pair: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
