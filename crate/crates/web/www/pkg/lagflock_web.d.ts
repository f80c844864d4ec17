/* tslint:disable */
/* eslint-disable */

/**
 * Result of a closed-loop run, flattened for JavaScript.
 */
export class Simulation {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    follower_count(): number;
    follower_path(k: number): Float64Array;
    /**
     * Agent-label pairs `[a, b, ...]` of the initial graph; label 0 is the leader.
     */
    initial_edges(): Uint32Array;
    /**
     * `[x0, y0, x1, y1, ...]`
     */
    leader_path(): Float64Array;
    summary(): string;
    times(): Float64Array;
    velocity_error(k: number): Float64Array;
}

/**
 * Proximity graph and topology-matrix spectrum for planar points.
 */
export class Spectrum {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    edges(): Uint32Array;
    /**
     * Ascending eigenvalues of `L_F + diag(leader links)`.
     */
    eigenvalues(): Float64Array;
    reaches_all(): boolean;
}

export function potential_profile(radius: number, d_bar: number, connected: boolean, samples: number): Float64Array;

export function simulate(_case: string, gain: number, t_end: number, estimate_fraction: number): Simulation;

export function topology_spectrum(xy: Float64Array, radius: number): Spectrum;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly __wbg_spectrum_free: (a: number, b: number) => void;
    readonly potential_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly simulation_follower_count: (a: number) => number;
    readonly simulation_follower_path: (a: number, b: number) => [number, number];
    readonly simulation_initial_edges: (a: number) => [number, number];
    readonly simulation_leader_path: (a: number) => [number, number];
    readonly simulation_summary: (a: number) => [number, number];
    readonly simulation_times: (a: number) => [number, number];
    readonly simulation_velocity_error: (a: number, b: number) => [number, number];
    readonly spectrum_edges: (a: number) => [number, number];
    readonly spectrum_eigenvalues: (a: number) => [number, number];
    readonly spectrum_reaches_all: (a: number) => number;
    readonly topology_spectrum: (a: number, b: number, c: number) => [number, number, number];
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
