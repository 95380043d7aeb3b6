"""How hard is it to stay hidden while still being heard?

A warden sums the received energy over all q frequency slots and L
samples and flags activity when the total crosses a threshold. The
transmitting side wants the warden's detection error probability (DEP,
false alarms plus misses) high and its own reliable transmission
probability (RTP) high at the same time. This script walks the transmit
power through the interesting range and shows the closed forms agreeing
with brute-force Monte Carlo at every step.

Run: python3 demos/detection_tradeoff.py
"""

from covertcomm import (
    RngSpec,
    SystemParams,
    dep,
    false_alarm_prob,
    miss_detection_conditional,
    power_from_snr_db,
    rtp,
    simulate_detector,
    simulate_rtp,
)

params = SystemParams()  # 4 stations, 4 of 64 slots occupied, 8 samples

print("System:", params.m, "stations,", params.k, "of", params.q,
      "slots occupied,", params.L, "samples per slot")
print("Warden threshold:", params.effective_threshold, "(normalized mode)")
print()

fa = false_alarm_prob(params)
print(f"False alarm probability at the default threshold: {fa:.3e}")
print("The threshold sits far above the pure-noise mean, so essentially")
print("all of the warden's error comes from missed detections.")
print()

print(" snr_db        dep   dep_mc        rtp   rtp_mc")
for i, snr in enumerate((31.0, 34.0, 37.0, 40.0, 43.0)):
    p = params.with_(p_b=power_from_snr_db(snr))
    _, md = simulate_detector(p, trials=20_000, rng=RngSpec(1, i))
    r_mc = simulate_rtp(p, trials=20_000, rng=RngSpec(2, i))
    print(f"{snr:7.1f}   {dep(p):8.4f} {fa + md.mean:8.4f}"
          f"   {rtp(p):8.4f} {r_mc.mean:8.4f}")

print()
print("More power makes the link reliable and the warden accurate at")
print("the same time; covertness is a budget, not a free lunch.")
print()

# the miss probability conditioned on the warden's channel gain swings
# from certain miss to near-certain detection within a factor of four
p37 = params.with_(p_b=power_from_snr_db(37.0))
print("Miss probability vs the warden's instantaneous channel gain g")
print("(37 dB transmit power):")
for g in (0.5, 1.0, 2.0):
    print(f"  g = {g:3.1f}: {miss_detection_conditional(p37, g):.6f}")
print()
print("Fading does the hiding: whenever the warden's channel happens to")
print("be weak, the transmission is invisible, and the average DEP is")
print("dominated by exactly those fades.")
