/* tslint:disable */
/* eslint-disable */

/**
 * `log10 ΔG_m²` over an `n × n` grid of `g_m1, g_m2` in 1–100 mS, with the
 * published component values and the given coupling and output
 * capacitors [pF]. `rule` is `inverse-diagonal` or `inductive-reactance`
 * (at 1.6 GHz).
 */
export function gm_surface(c_in_pf: number, c_ds3_pf: number, n: number, rule: string): Float64Array;

/**
 * Noise figure [dB] on an `n × n` grid over `[-1, 1]²` in the Γ_s plane,
 * row index along Re Γ_s. Points outside the unit disk are NaN.
 */
export function nf_map(nf_min_db: number, r_n: number, gamma_opt_mag: number, gamma_opt_deg: number, n: number, textbook: boolean): Float64Array;

/**
 * Rows of `[Pin, gain, P_fund, P_IM3, P_IM5]` in dBm/dB, flattened. Absent
 * products are NaN.
 */
export function two_tone(gain_db: number, iip3_dbm: number, a5: number, pin_start: number, pin_stop: number, step: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gm_surface: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly nf_map: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly two_tone: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
