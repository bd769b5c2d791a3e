/** Editor state: the current diagram plus selection, dirty flag and the
 * last server verdicts.  Pure data — no DOM, no network — so every rule
 * (fresh ids, single-driver inputs, signs-driven arity) is unit-testable.
 *
 * The rules deliberately mirror the service: anything this model lets you
 * build exports to a document the service will at least parse.
 */

import {
  BlockJson,
  DiagramJson,
  Diagnostic,
  Endpoint,
  LinkJson,
  PaletteEntry,
  ResultJson,
  SettingsJson,
  emptyDiagram,
  isUnset,
} from "./interchange.js";

export type LinkRejection = "unknown-block" | "bad-port" | "occupied";

export interface LinkResult {
  ok: boolean;
  link?: LinkJson;
  reason?: LinkRejection;
  message?: string;
}

/** Number of entries in a signs vector like "[+1;-1]"; null if unreadable. */
export function signsArity(raw: string): number | null {
  if (isUnset(raw)) {
    return null;
  }
  const body = raw.trim().replace(/^\[/, "").replace(/\]$/, "");
  const entries = body.split(/[;,]/).map((e) => e.trim()).filter((e) => e !== "");
  if (entries.length === 0 || !entries.every((e) => /^[+-]?1$/.test(e))) {
    return null;
  }
  return entries.length;
}

function sameEndpoint(a: Endpoint, b: Endpoint): boolean {
  return a[0] === b[0] && a[1] === b[1];
}

export class EditorModel {
  doc: DiagramJson;
  selection: string | null = null;
  dirty = false;
  lastDiagnostics: Diagnostic[] = [];
  lastResult: ResultJson | null = null;

  constructor(doc?: DiagramJson) {
    this.doc = doc ?? emptyDiagram();
  }

  // ------------------------------------------------------------- queries

  block(id: string): BlockJson | undefined {
    return this.doc.blocks.find((b) => b.id === id);
  }

  link(id: string): LinkJson | undefined {
    return this.doc.links.find((l) => l.id === id);
  }

  driverOf(dst: Endpoint): LinkJson | undefined {
    return this.doc.links.find((l) => sameEndpoint(l.dst, dst));
  }

  blockIds(): string[] {
    return this.doc.blocks.map((b) => b.id);
  }

  linkIds(): string[] {
    return this.doc.links.map((l) => l.id);
  }

  /** Smallest unused numeric id; "0" and "1" are reserved by the format. */
  freshId(): string {
    const used = new Set<string>([...this.blockIds(), ...this.linkIds()]);
    let n = 2;
    while (used.has(String(n))) {
      n += 1;
    }
    return String(n);
  }

  // ----------------------------------------------------------- mutations

  private touch(): void {
    this.dirty = true;
  }

  addBlock(entry: PaletteEntry, x: number, y: number): BlockJson {
    const params: Record<string, string> = {};
    for (const [name, spec] of Object.entries(entry.params)) {
      params[name] = spec.default;
    }
    let nIn = entry.n_in;
    if (entry.variadic_inputs && typeof params["signs"] === "string") {
      nIn = signsArity(params["signs"]) ?? nIn;
    }
    const block: BlockJson = {
      id: this.freshId(),
      kind: entry.kind,
      position: [x, y],
      n_in: nIn,
      n_out: entry.n_out,
      params,
      attrs: {},
    };
    this.doc.blocks.push(block);
    this.touch();
    return block;
  }

  moveBlock(id: string, x: number, y: number): void {
    const block = this.block(id);
    if (block) {
      block.position = [x, y];
      this.touch();
    }
  }

  removeBlock(id: string): void {
    const before = this.doc.blocks.length;
    this.doc.blocks = this.doc.blocks.filter((b) => b.id !== id);
    if (this.doc.blocks.length === before) {
      return;
    }
    this.doc.links = this.doc.links.filter(
      (l) => l.src[0] !== id && l.dst[0] !== id
    );
    if (this.selection === id) {
      this.selection = null;
    }
    this.touch();
  }

  removeLink(id: string): void {
    const before = this.doc.links.length;
    this.doc.links = this.doc.links.filter((l) => l.id !== id);
    if (this.doc.links.length !== before) {
      if (this.selection === id) {
        this.selection = null;
      }
      this.touch();
    }
  }

  removeSelected(): void {
    if (this.selection === null) {
      return;
    }
    if (this.block(this.selection)) {
      this.removeBlock(this.selection);
    } else {
      this.removeLink(this.selection);
    }
  }

  addLink(src: Endpoint, dst: Endpoint): LinkResult {
    const from = this.block(src[0]);
    const to = this.block(dst[0]);
    if (!from || !to) {
      return { ok: false, reason: "unknown-block", message: "no such block" };
    }
    if (src[1] < 0 || src[1] >= from.n_out) {
      return {
        ok: false,
        reason: "bad-port",
        message: `${from.id} has no output ${src[1]}`,
      };
    }
    if (dst[1] < 0 || dst[1] >= to.n_in) {
      return {
        ok: false,
        reason: "bad-port",
        message: `${to.id} has no input ${dst[1]}`,
      };
    }
    const driver = this.driverOf(dst);
    if (driver) {
      return {
        ok: false,
        reason: "occupied",
        message: `input ${dst[1]} of ${to.id} is already driven by ${driver.src[0]}`,
      };
    }
    const link: LinkJson = {
      id: this.freshId(),
      src: [src[0], src[1]],
      dst: [dst[0], dst[1]],
    };
    this.doc.links.push(link);
    this.touch();
    return { ok: true, link };
  }

  /** Write raw parameter text.  A "signs" edit re-derives the input count;
   * links into ports that vanished are pruned and returned. */
  setParam(blockId: string, name: string, raw: string): { pruned: LinkJson[] } {
    const block = this.block(blockId);
    if (!block || !(name in block.params)) {
      return { pruned: [] };
    }
    block.params[name] = raw;
    let pruned: LinkJson[] = [];
    if (name === "signs") {
      const arity = signsArity(raw);
      if (arity !== null && arity !== block.n_in) {
        block.n_in = arity;
        pruned = this.doc.links.filter(
          (l) => l.dst[0] === blockId && l.dst[1] >= arity
        );
        this.doc.links = this.doc.links.filter((l) => !pruned.includes(l));
      }
    }
    this.touch();
    return { pruned };
  }

  setTitle(title: string): void {
    this.doc.title = title;
    this.touch();
  }

  patchSettings(patch: SettingsJson): void {
    this.doc.settings = { ...this.doc.settings, ...patch };
    this.touch();
  }

  /** Replace the whole document (import, demo load).  Rejects documents the
   * service could not have produced so a bad upload leaves the canvas alone. */
  load(doc: DiagramJson): void {
    if (!doc || typeof doc !== "object" || doc.format !== 1) {
      throw new Error("not an interchange document (format marker missing)");
    }
    if (!Array.isArray(doc.blocks) || !Array.isArray(doc.links)) {
      throw new Error("not an interchange document (blocks/links missing)");
    }
    const ids = new Set<string>();
    for (const item of [...doc.blocks, ...doc.links]) {
      if (ids.has(item.id)) {
        throw new Error(`duplicate id ${JSON.stringify(item.id)}`);
      }
      ids.add(item.id);
    }
    this.doc = doc;
    this.selection = null;
    this.dirty = false;
    this.lastDiagnostics = [];
    this.lastResult = null;
  }

  clear(title = ""): void {
    this.load(emptyDiagram(title));
  }
}
