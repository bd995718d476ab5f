/* tslint:disable */
/* eslint-disable */

export class SineGordonField {
    free(): void;
    [Symbol.dispose](): void;
    constructor(alpha: number, epsilon: number, lambda: number, length: number, horizon: number, gamma: number, amplitude: number, nx: number, nt: number);
    values(): Float64Array;
    readonly contractionRatio: number;
    readonly iterations: number;
    readonly nt: number;
    readonly nx: number;
    readonly residual: number;
}

/**
 * `[delta, p_lambda, q_lambda]`.
 */
export function decayConstants(alpha: number, epsilon: number, lambda: number, length: number): Float64Array;

export function greenProfile(alpha: number, epsilon: number, lambda: number, length: number, xi: number, t: number, points: number, self_adjoint: boolean): Float64Array;

export function modeSpectrum(alpha: number, epsilon: number, lambda: number, length: number, n_max: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_sinegordonfield_free: (a: number, b: number) => void;
    readonly decayConstants: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly greenProfile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly modeSpectrum: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly sinegordonfield_contractionRatio: (a: number) => number;
    readonly sinegordonfield_iterations: (a: number) => number;
    readonly sinegordonfield_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly sinegordonfield_nt: (a: number) => number;
    readonly sinegordonfield_nx: (a: number) => number;
    readonly sinegordonfield_residual: (a: number) => number;
    readonly sinegordonfield_values: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
