/* tslint:disable */
/* eslint-disable */

/**
 * JSON `{label, description}` of the nearest synthetic class.
 */
export function classify(corner: number, hinge: number, angle_deg: number, over: boolean): string;

/**
 * JSON with the folded boundary and its 28 dGLI coordinates.
 */
export function fold(corner: number, hinge: number, angle_deg: number, over: boolean): string;

/**
 * JSON with an SVG heatmap of a built-in sequence and its sign-change frames.
 */
export function sequence(index: number, frames_per_fold: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly classify: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly fold: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sequence: (a: number, b: number) => [number, number, number, number];
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
