/* tslint:disable */
/* eslint-disable */

/**
 * Algorithm B² from node 0 of a random plane network. `first` is null for
 * the source, which starts informed.
 */
export function broadcast(side: number, n: number, s: number, gamma: number, seed: bigint): string;

/**
 * Algorithm A² on the `sqrt(n) x sqrt(n)` lattice from the corner node.
 */
export function lattice_wave(n: number, r: number, s: number): string;

/**
 * A random plane network in a `side x side` square with unit range.
 */
export function placement(side: number, n: number, s: number, gamma: number, seed: bigint): string;

/**
 * One round with the given transmitters on explicit plane points
 * (`xs`, `ys`). Per node: "tx", "heard:<sender>", "collision", "swamped" or "idle".
 */
export function reception(xs: Float64Array, ys: Float64Array, s: number, gamma: number, transmitters: Uint32Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly broadcast: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly lattice_wave: (a: number, b: number, c: number) => [number, number, number, number];
    readonly placement: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly reception: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
