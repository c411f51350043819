/* tslint:disable */
/* eslint-disable */

export function cm_trajectory(q: number, beta: number, n: number, lambda0: number, steps: number, seed: bigint): Float64Array;

export function drift_curves(q: number, beta: number, points: number): Float64Array;

export function glauber_trajectory(q: number, beta: number, n: number, m0: number, sweeps: number, seed: bigint): Float64Array;

export function thresholds(q: number, beta: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cm_trajectory: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly drift_curves: (a: number, b: number, c: number) => [number, number, number, number];
    readonly glauber_trajectory: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly thresholds: (a: number, b: number) => [number, number, number, number];
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
