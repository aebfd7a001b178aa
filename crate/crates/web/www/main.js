import init, { thrustProfile, simulateJump, phasePortrait } from "./pkg/sarrus_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

function overrides() {
  return [
    `options.theta0=${$("theta0").value}`,
    `masses.mu_C=${$("mu").value / 1000}`,
    `geometry.l0=${$("l0").value / 1000}`,
  ].join("\n");
}

function plot(canvas, series, { xLabel, yLabel, marks = [] }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x).concat(marks.map((m) => m.x));
  const ys = series.flatMap((s) => s.y).concat(marks.map((m) => m.y));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys)];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, py(0));
  ctx.lineTo(w - pad, py(0));
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(xLabel, w - pad - 60, h - 10);
  ctx.fillText(yLabel, 4, pad - 10);
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad);

  series.forEach((s, i) => {
    ctx.strokeStyle = s.color ?? COLORS[i % COLORS.length];
    ctx.beginPath();
    s.x.forEach((x, k) => (k ? ctx.lineTo(px(x), py(s.y[k])) : ctx.moveTo(px(x), py(s.y[k]))));
    ctx.stroke();
  });
  for (const m of marks) {
    ctx.fillStyle = m.color;
    ctx.beginPath();
    ctx.arc(px(m.x), py(m.y), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function showError(e) {
  $("summary").className = "error";
  $("summary").textContent = String(e);
}

function update() {
  $("theta0-out").value = Number($("theta0").value).toFixed(3);
  $("mu-out").value = Number($("mu").value).toFixed(1);
  $("l0-out").value = Number($("l0").value).toFixed(1);
  const ov = overrides();
  try {
    const p = JSON.parse(thrustProfile(ov, 300));
    plot($("thrust"), [
      { x: p.theta, y: p.thrust },
      { x: p.theta, y: p.drive_force, color: "#aaa" },
    ], { xLabel: "θ [rad]", yLabel: "F_y, F_l [N]" });

    const j = JSON.parse(simulateJump(ov));
    const s = j.summary;
    $("summary").className = "";
    $("summary").textContent = s.termination === "TakeOff"
      ? `take-off ${(s.t_off_s * 1e3).toFixed(1)} ms   v0 ${s.v0_mps.toFixed(3)} m/s   ` +
        `apex ${(s.h_max_m * 100).toFixed(1)} cm   η ${s.eta_pct.toFixed(1)} %`
      : `no take-off: ${s.termination}`;
    plot($("jump"), [
      { x: j.t, y: j.h_dot },
      { x: j.t, y: j.ground_reaction, color: "#d62728" },
    ], { xLabel: "t [s]", yLabel: "ḣ [m/s], F_N [N]" });

    const angles = [0.066, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2];
    const pp = JSON.parse(phasePortrait(ov, new Float64Array(angles), $("damped").checked));
    plot($("portrait"), pp.curves.map((c) => ({ x: c.theta, y: c.theta_dot })), {
      xLabel: "θ [rad]",
      yLabel: "θ̇ [rad/s]",
      marks: pp.equilibria.map((e) => ({ x: e.theta, y: 0, color: e.kind === "Center" ? "#2ca02c" : "#000" })),
    });
  } catch (e) {
    showError(e);
  }
}

await init();
for (const id of ["theta0", "mu", "l0", "damped"]) $(id).addEventListener("input", update);
update();
