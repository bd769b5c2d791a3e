/** Thin client for the workbench HTTP API.
 *
 * Every numeric result in the editor comes through here — the browser never
 * simulates anything itself.  Transport and protocol failures surface as
 * ApiError; "the server looked at your diagram and said no" is a normal
 * reply shape, not an exception.
 */

import {
  Diagnostic,
  DiagramJson,
  PaletteEntry,
  ResultJson,
  SettingsJson,
} from "./interchange.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
    readonly payload: unknown = null
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** True when the service never answered (down, DNS, CORS...). */
  get connectivity(): boolean {
    return this.status === null;
  }
}

export type SimulateReply =
  | { kind: "ok"; diagnostics: Diagnostic[]; result: ResultJson; timingMs: number }
  | { kind: "invalid"; diagnostics: Diagnostic[] }
  | { kind: "failed"; code: string; message: string };

interface RawReply {
  status: number;
  body: any;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async exchange(
    path: string,
    init?: RequestInit
  ): Promise<RawReply> {
    let response: Response;
    try {
      response = await fetch(this.base + path, init);
    } catch (e) {
      throw new ApiError(`service unreachable: ${e}`, null);
    }
    let body: any = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON reply; leave body null and let status decide
    }
    return { status: response.status, body };
  }

  private async post(path: string, payload: unknown): Promise<RawReply> {
    return this.exchange(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  private fail(reply: RawReply, what: string): never {
    const message =
      reply.body && typeof reply.body.message === "string"
        ? reply.body.message
        : `${what} failed with HTTP ${reply.status}`;
    throw new ApiError(message, reply.status, reply.body);
  }

  async health(): Promise<boolean> {
    const reply = await this.exchange("/api/health");
    return reply.status === 200 && reply.body?.status === "ok";
  }

  async blocks(): Promise<PaletteEntry[]> {
    const reply = await this.exchange("/api/blocks");
    if (reply.status !== 200 || !Array.isArray(reply.body)) {
      this.fail(reply, "palette fetch");
    }
    return reply.body as PaletteEntry[];
  }

  /** Diagnostics for a diagram (or for XML text via {@link validateXml}).
   * Always a list — an unparseable document is just a one-entry list. */
  async validate(diagram: DiagramJson): Promise<Diagnostic[]> {
    return this.validateBody({ diagram_json: diagram });
  }

  async validateXml(xml: string): Promise<Diagnostic[]> {
    return this.validateBody({ diagram_xml: xml });
  }

  private async validateBody(body: object): Promise<Diagnostic[]> {
    const reply = await this.post("/api/validate", body);
    if (reply.status !== 200 || !Array.isArray(reply.body?.diagnostics)) {
      this.fail(reply, "validate");
    }
    return reply.body.diagnostics as Diagnostic[];
  }

  async simulate(
    diagram: DiagramJson,
    options?: SettingsJson
  ): Promise<SimulateReply> {
    const payload: Record<string, unknown> = { diagram_json: diagram };
    if (options && Object.keys(options).length > 0) {
      payload["options"] = options;
    }
    const reply = await this.post("/api/simulate", payload);
    if (reply.status === 422 && Array.isArray(reply.body?.diagnostics)) {
      return { kind: "invalid", diagnostics: reply.body.diagnostics };
    }
    if (reply.status === 200 && reply.body?.status === "ok") {
      return {
        kind: "ok",
        diagnostics: reply.body.diagnostics ?? [],
        result: reply.body.result as ResultJson,
        timingMs: Number(reply.body.timing_ms ?? 0),
      };
    }
    if (
      (reply.status === 200 || reply.status === 408) &&
      reply.body?.status === "error"
    ) {
      return {
        kind: "failed",
        code: String(reply.body.code ?? "ERROR"),
        message: String(reply.body.message ?? "simulation failed"),
      };
    }
    this.fail(reply, "simulate");
  }

  async toXml(diagram: DiagramJson): Promise<string> {
    const reply = await this.post("/api/convert", {
      diagram_json: diagram,
      to: "xml",
    });
    if (reply.status !== 200 || typeof reply.body?.diagram_xml !== "string") {
      this.fail(reply, "convert to XML");
    }
    return reply.body.diagram_xml;
  }

  async fromXml(xml: string): Promise<DiagramJson> {
    const reply = await this.post("/api/convert", {
      diagram_xml: xml,
      to: "json",
    });
    if (reply.status !== 200 || typeof reply.body?.diagram_json !== "object") {
      this.fail(reply, "convert to JSON");
    }
    return reply.body.diagram_json as DiagramJson;
  }

  /** Round a parsed JSON document through the service so imports get the
   * same strict checking as XML uploads. */
  async normalize(diagram: unknown): Promise<DiagramJson> {
    const reply = await this.post("/api/convert", {
      diagram_json: diagram,
      to: "json",
    });
    if (reply.status !== 200 || typeof reply.body?.diagram_json !== "object") {
      this.fail(reply, "import");
    }
    return reply.body.diagram_json as DiagramJson;
  }
}
