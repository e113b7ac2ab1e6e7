/* tslint:disable */
/* eslint-disable */

/**
 * Beam fitted to an angular window `theta ± B·sigma` (degrees, array
 * frame).
 */
export function beam_pattern(theta_deg: number, sigma_deg: number): string;

/**
 * Collision gate for a UAV at the origin with isotropic-plus-skew
 * covariance (`var_x`, `var_y`, correlation `rho`) and one obstacle at
 * `(ox, oy)` with per-axis variance `obstacle_var`. The clearance rate is
 * estimated from `draws` paired samples.
 */
export function collision_gate(var_x: number, var_y: number, rho: number, obstacle_var: number, ox: number, oy: number, draws: number): string;

/**
 * Runs one episode with the default configuration. `weights` is the text
 * of a trained weights file and is only read for the learned policy.
 */
export function simulate(seed: bigint, policy: string, weights?: string | null): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly beam_pattern: (a: number, b: number) => [number, number, number, number];
    readonly collision_gate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly simulate: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
