#!/usr/bin/env python3
"""Regenerates the shipped road/vehicle/scenario pack under data/."""
import json
import math
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def smoothstep(x):
    x = min(max(x, 0.0), 1.0)
    return x * x * (3.0 - 2.0 * x)


def write(rel, obj):
    path = os.path.join(ROOT, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def uturn():
    radius, lead, ramp, exit_len = 50.0, 120.0, 20.0, 60.0
    bank = -math.atan(0.3)
    arc = math.pi * radius - ramp
    length = math.floor(lead + 2 * ramp + arc + exit_len)
    s, kappa, phi, grade = [], [], [], []
    for i in range(int(length) + 1):
        x = float(i)
        if x < lead:
            w = 0.0
        elif x < lead + ramp:
            w = smoothstep((x - lead) / ramp)
        elif x < lead + ramp + arc:
            w = 1.0
        elif x < lead + 2 * ramp + arc:
            w = 1.0 - smoothstep((x - lead - ramp - arc) / ramp)
        else:
            w = 0.0
        s.append(x)
        kappa.append(w / radius)
        phi.append(w * bank)
        grade.append(0.0)
    return {
        "name": "offcamber_uturn",
        "type": "ribbon",
        "length": length,
        "half_width": 2.5,
        "profiles": {"s": s, "kappa": kappa, "bank": phi, "grade": grade},
    }


def hill_s_curve():
    length = 400.0
    s, kappa, phi, grade = [], [], [], []
    for i in range(0, 401, 2):
        x = float(i)
        s.append(x)
        kappa.append(0.012 * math.sin(2 * math.pi * x / 200.0))
        phi.append(0.08 * math.sin(2 * math.pi * x / 200.0 + 0.3))
        grade.append(0.06 * math.sin(2 * math.pi * x / 160.0))
    return {
        "name": "hill_s_curve",
        "type": "ribbon",
        "length": length,
        "half_width": 3.0,
        "profiles": {"s": s, "kappa": kappa, "bank": phi, "grade": grade},
    }


def main():
    write("roads/plane.json", {"name": "plane", "type": "plane", "length": 400.0, "half_width": 2.5})
    write("roads/crest.json", {"name": "crest", "type": "crest", "vertical_radius": 100.0,
                               "length": 100.0, "half_width": 2.5})
    write("roads/banked_arc.json", {"name": "banked_arc", "type": "banked_arc", "radius": 50.0,
                                    "bank_angle": 0.2, "arc_angle": math.pi, "half_width": 2.5})
    write("roads/offcamber_arc.json", {"name": "offcamber_arc", "type": "banked_arc",
                                       "radius": 50.0, "bank_angle": -math.atan(0.3),
                                       "arc_angle": math.pi, "half_width": 2.5})
    write("roads/offcamber_uturn.json", uturn())
    write("roads/hill_s_curve.json", hill_s_curve())

    write("vehicles/sedan.json", {
        "name": "sedan", "mass": 1500.0, "inertia1": 600.0, "inertia2": 2200.0,
        "inertia3": 2500.0, "cg_height": 0.55, "l_front": 1.2, "l_rear": 1.4,
        "t_front": 0.75, "t_rear": 0.75, "mu": 0.9, "gravity": 9.81, "k_drag": 0.4,
        "k_lift": 0.0,
        "tire": {"B": 10.0, "C": 1.9, "D": 1.0, "E": 0.97},
        "actuator": {"lag": 0.05, "cap": 8000.0}})

    g, r_v = 9.81, 100.0
    common = {"road": "../roads/%s.json", "vehicle": "../vehicles/sedan.json"}

    def scenario(name, road, **fields):
        body = {"name": name, "road": common["road"] % road, "vehicle": common["vehicle"]}
        body.update(fields)
        write("scenarios/%s.json" % name, body)

    scenario("plane_plan", "plane", v0=20.0, N=10, s_start=0.0, s_end=90.0, B_profile=0.0)
    scenario("plane_sim", "plane", v0=20.0, N=10, s_start=0.0, s_end=300.0, mode="safety_system",
             t_max=20.0)
    scenario("crest_slow", "crest", v0=0.9 * math.sqrt(g * r_v), N=20, s_start=0.0, s_end=20.0)
    scenario("crest_fast", "crest", v0=1.2 * math.sqrt(g * r_v), N=20, s_start=0.0, s_end=20.0)
    scenario("banked_arc_plan", "banked_arc", v0=24.0, N=50, s_start=0.0, s_end=150.0)
    scenario("hill_plan", "hill_s_curve", v0=24.0, N=60, s_start=0.0, s_end=390.0,
             B_profile=-500.0)
    uturn_sim = {"v0": 25.0, "N": 60, "s_start": 0.0, "s_end": 340.0, "t_max": 40.0,
                 "horizon": 100.0, "horizon_stages": 30, "plan_mu_scale": 0.9,
                 "driver": {"k_p": 0.3, "k_i": 0.05, "k_theta": 1.5}}
    scenario("uturn_plan", "offcamber_uturn", v0=25.0, N=60, s_start=0.0, s_end=300.0)
    scenario("uturn_none", "offcamber_uturn", mode="none", expect="depart", **uturn_sim)
    scenario("uturn_delayed", "offcamber_uturn", mode="delayed_driver", driver_delay=4.5,
             driver_brake=9000.0, **uturn_sim)
    scenario("uturn_safety", "offcamber_uturn", mode="safety_system", expect="complete",
             **uturn_sim)
    scenario("uturn_planar", "offcamber_uturn", mode="safety_system_planar", expect="depart",
             **uturn_sim)


if __name__ == "__main__":
    main()
