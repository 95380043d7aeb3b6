"""Squeezing the most rate out of the covertness window.

Reliability puts a floor under the transmit power (too quiet and the
receiver cannot decode), covertness puts a ceiling on it (too loud and
the warden sees you). Between them lies a feasible window, the rate is
increasing in power, so the best operating point is the top of the
window. Stacking more users into the band pushes the floor up faster
than the ceiling until the window snaps shut; that snap point is the
user capacity.

Run: python3 demos/power_window.py
"""

from covertcomm import (
    SystemParams,
    covert_rate,
    max_users,
    optimal_power,
    power_from_snr_db,
)

params = SystemParams()  # eps_e = eps_u = 0.1

print("Tolerances: warden error floor", 1 - params.eps_e,
      "; outage ceiling", params.eps_u)
print()
print("  k      p_low        p_up     rate at top   rate at floor")
for k in (2, 4, 8, 16):
    res = optimal_power(params.with_(k=k), p_max=1e5)
    b = res.bounds
    print(f"{k:3d}  {b.p_low:9.3f}  {b.p_up:10.1f}"
          f"   {res.rate_star:10.3f}   {covert_rate(params.with_(k=k), b.p_low):10.3f}")

print()
print("Both bounds rise with k: more occupied slots mean less power per")
print("slot before the warden notices, but also more total energy needed")
print("for reliable decoding. Operating at p_up rather than p_low is")
print("worth several bits per channel use.")
print()

small = SystemParams(m=2, k=2, q=8, L=2, gamma_e=2.0)
print("User capacity on an 8-slot band as the power budget grows:")
print("  budget_db   k_star   feasible k")
for snr in (8.0, 10.0, 12.0, 14.0, 16.0):
    cap = max_users(small, p_max=power_from_snr_db(snr))
    feasible = [k for k, b in cap.per_k if b.feasible]
    print(f"{snr:10.1f}   {cap.k_star:6d}   {feasible}")

print()
print("The feasible set is always a prefix 1..k_star: once the per-user")
print("window closes it never reopens for a more crowded band.")
