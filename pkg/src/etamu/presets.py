"""Scenario templates for the standard figure sweeps."""

PRESETS = {
    "fig1": """\
# Outage vs mean SNR per branch, four i.n.i.d. branches, common eta.
name: fig1
channel:
  branches:
    - {format: I, mu: 0.75, eta: 0.5, p: 0.1}
    - {format: I, mu: 1.25, eta: 0.5, p: 0.2}
    - {format: I, mu: 1.75, eta: 0.5, p: 0.3}
    - {format: I, mu: 1.5, eta: 0.5, p: 0.4}
sweep:
  - {variable: eta, values: [0.2, 0.5, 0.9]}
  - {variable: common-gbar-dB, start: 0, stop: 40, points: 41}
metrics: [outage]
options:
  threshold_db: 0
sim:
  enabled: false
  seed: 1
  replicas: 100000
""",
    "fig2": """\
# Outage over the (eta, p) plane, two i.i.d. branches, mu = 1.5.
# Repeat with gbar_db in {0, 5, 7.5, 10, 15}.
name: fig2
channel:
  branches:
    - {format: I, mu: 1.5, eta: 1.0, p: 1.0, gbar_db: 10}
  replicate: 2
sweep:
  - {variable: p, start: 0.1, stop: 10, points: 41, spacing: log}
  - {variable: eta, start: 0.1, stop: 10, points: 41, spacing: log}
metrics: [outage]
options:
  threshold_db: 0
""",
    "fig3": """\
# BPSK error rate vs mean SNR per branch, three i.n.i.d. branches.
name: fig3
channel:
  branches:
    - {format: I, mu: 1.0, eta: 0.25, p: 0.5}
    - {format: I, mu: 1.0, eta: 0.5, p: 0.5}
    - {format: I, mu: 1.0, eta: 0.75, p: 0.5}
sweep:
  - {variable: mu, values: [0.5, 1, 1.5, 2, 4]}
  - {variable: common-gbar-dB, start: 0, stop: 30, points: 31}
metrics: [ser]
options:
  modulation: BPSK
sim:
  enabled: false
  seed: 3
  replicas: 100000
""",
    "capacity": """\
# Approximate ergodic capacity, three i.i.d. branches.
name: capacity
channel:
  branches:
    - {format: I, mu: 1.0, eta: 0.25, p: 0.25}
  replicate: 3
sweep:
  - {variable: common-gbar-dB, start: 0, stop: 20, points: 11}
metrics: [capacity]
sim:
  enabled: true
  seed: 7
  replicas: 200000
""",
}
