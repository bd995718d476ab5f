/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_sinegordonfield_free: (a: number, b: number) => void;
export const decayConstants: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const greenProfile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const modeSpectrum: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const sinegordonfield_contractionRatio: (a: number) => number;
export const sinegordonfield_iterations: (a: number) => number;
export const sinegordonfield_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const sinegordonfield_nt: (a: number) => number;
export const sinegordonfield_nx: (a: number) => number;
export const sinegordonfield_residual: (a: number) => number;
export const sinegordonfield_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
