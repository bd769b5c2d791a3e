/** Wire types shared with the simulation service.
 *
 * The diagram shape mirrors the interchange JSON (`format: 1`) that the
 * service reads and writes; the rest match the /api payloads.
 */

export type SolverName = "rk4" | "adaptive";

export interface SettingsJson {
  t0?: number;
  tf?: number;
  solver?: SolverName;
  dt?: number;
  rtol?: number;
  atol?: number;
  max_step?: number | null;
}

export interface BlockJson {
  id: string;
  kind: string;
  position: [number, number];
  n_in: number;
  n_out: number;
  params: Record<string, string>;
  attrs: Record<string, string>;
}

/** [block id, port ordinal] */
export type Endpoint = [string, number];

export interface LinkJson {
  id: string;
  src: Endpoint;
  dst: Endpoint;
}

export interface DiagramJson {
  format: 1;
  title: string;
  background: number;
  settings: SettingsJson;
  blocks: BlockJson[];
  links: LinkJson[];
  attrs: Record<string, string>;
}

/** Placeholder the service treats as "parameter not filled in yet". */
export const UNSET = "%s";

export function isUnset(raw: string): boolean {
  return raw.trim() === "" || raw.trim() === UNSET;
}

export function emptyDiagram(title = ""): DiagramJson {
  return {
    format: 1,
    title,
    background: -1,
    settings: {},
    blocks: [],
    links: [],
    attrs: {},
  };
}

// ---------------------------------------------------------------- palette

export interface ParamSpec {
  expect: string;
  default: string;
  unit: string;
}

export interface PaletteEntry {
  kind: string;
  label: string;
  n_in: number;
  n_out: number;
  variadic_inputs: boolean;
  discrete: boolean;
  params: Record<string, ParamSpec>;
}

// ------------------------------------------------------------ diagnostics

export interface Diagnostic {
  severity: "error" | "warning";
  code: string;
  blocks: string[];
  message: string;
}

export function formatDiagnostic(d: Diagnostic): string {
  const where = d.blocks.length ? " " + d.blocks.join(", ") : "";
  return `${d.severity} ${d.code}${where}: ${d.message}`;
}

// ----------------------------------------------------------------- result

export interface ResultJson {
  times: number[];
  signals: Record<string, number[]>;
  metadata: Record<string, unknown>;
}
