/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const __wbg_spectrum_free: (a: number, b: number) => void;
export const potential_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const simulation_follower_count: (a: number) => number;
export const simulation_follower_path: (a: number, b: number) => [number, number];
export const simulation_initial_edges: (a: number) => [number, number];
export const simulation_leader_path: (a: number) => [number, number];
export const simulation_summary: (a: number) => [number, number];
export const simulation_times: (a: number) => [number, number];
export const simulation_velocity_error: (a: number, b: number) => [number, number];
export const spectrum_edges: (a: number) => [number, number];
export const spectrum_eigenvalues: (a: number) => [number, number];
export const spectrum_reaches_all: (a: number) => number;
export const topology_spectrum: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
