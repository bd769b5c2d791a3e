/** Bundled one-click demos for the gallery: a first-order lag responding to
 * a step, and the DC-motor speed loop.  Each build() returns a fresh
 * document so edits to a loaded demo never leak into the next load.
 */

import { BlockJson, DiagramJson, LinkJson } from "./interchange.js";

export interface Demo {
  name: string;
  blurb: string;
  build(): DiagramJson;
}

function block(
  id: string,
  kind: string,
  x: number,
  y: number,
  nIn: number,
  nOut: number,
  params: Record<string, string>
): BlockJson {
  return { id, kind, position: [x, y], n_in: nIn, n_out: nOut, params, attrs: {} };
}

function link(id: string, src: [string, number], dst: [string, number]): LinkJson {
  return { id, src, dst };
}

function lagDemo(): DiagramJson {
  return {
    format: 1,
    title: "first-order lag",
    background: -1,
    settings: { t0: 0, tf: 3, solver: "rk4", dt: 0.001, rtol: 1e-6, atol: 1e-9, max_step: null },
    blocks: [
      block("step1", "STEP_FUNCTION", 60, 120, 0, 1, {
        step_time: "0.0",
        initial: "0.0",
        final: "1.0",
      }),
      block("lag1", "CLR", 280, 120, 1, 1, { num: "1", den: "1+0.5*s" }),
      block("scope1", "CSCOPE", 500, 120, 1, 0, {}),
    ],
    links: [
      link("2", ["step1", 0], ["lag1", 0]),
      link("3", ["lag1", 0], ["scope1", 0]),
    ],
    attrs: {},
  };
}

function dcMotorDemo(): DiagramJson {
  return {
    format: 1,
    title: "DC motor speed",
    background: -1,
    settings: { t0: 0, tf: 8, solver: "rk4", dt: 0.001, rtol: 1e-6, atol: 1e-9, max_step: null },
    blocks: [
      block("step1", "STEP_FUNCTION", 40, 140, 0, 1, {
        step_time: "0.0",
        initial: "0.0",
        final: "1.0",
      }),
      block("sum1", "SUMMATION", 220, 140, 2, 1, { signs: "[+1;-1]" }),
      block("elec1", "CLR", 400, 140, 1, 1, { num: "1", den: "1+0.5*s" }),
      block("kgain1", "GAINBLK", 580, 140, 1, 1, { gain: "0.01" }),
      block("mech1", "CLR", 760, 140, 1, 1, { num: "1", den: "0.1+0.01*s" }),
      block("scope1", "CSCOPE", 940, 140, 1, 0, {}),
      block("emf1", "GAINBLK", 580, 320, 1, 1, { gain: "0.01" }),
    ],
    links: [
      link("2", ["step1", 0], ["sum1", 0]),
      link("3", ["sum1", 0], ["elec1", 0]),
      link("4", ["elec1", 0], ["kgain1", 0]),
      link("5", ["kgain1", 0], ["mech1", 0]),
      link("6", ["mech1", 0], ["scope1", 0]),
      link("7", ["mech1", 0], ["emf1", 0]),
      link("8", ["emf1", 0], ["sum1", 1]),
    ],
    attrs: {},
  };
}

export const DEMOS: Demo[] = [
  {
    name: "First-order lag",
    blurb: "unit step into 1/(1+0.5s), scoped",
    build: lagDemo,
  },
  {
    name: "DC motor speed loop",
    blurb: "voltage step, electrical + mechanical poles, back-EMF feedback",
    build: dcMotorDemo,
  },
];
