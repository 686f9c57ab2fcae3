#!/usr/bin/env python3
"""One-off generator for the bundled scenario fixtures.

Weekly simple returns for two 30-asset universes from a seeded one-factor
model: r_ij = mu_j + beta_j * f_i + e_ij with a common market factor f and
idiosyncratic noise e. Values are rounded to 6 decimals. Run from the
repository root; rewrites data/us30_weekly.csv and data/eu30_weekly.csv.
"""
import random

US = ("AA,AXP,BA,BAC,CAT,CSCO,CVX,DD,DIS,GE,HD,HPQ,IBM,INTC,JNJ,JPM,KO,MCD,"
      "MMM,MRK,MSFT,PFE,PG,T,TRV,UNH,UTX,VZ,WMT,XOM").split(",")
EU = ("ADS.DE,ALV.DE,BAS.DE,BAYN.DE,BEI.DE,BMW.DE,CBK.DE,CON.DE,DAI.DE,DBK.DE,"
      "DB1.DE,LHA.DE,DPW.DE,DTE.DE,EOAN.DE,FRE.DE,FME.DE,HEI.DE,HEN3.DE,IFX.DE,"
      "SDF.DE,LXS.DE,LIN.DE,MRK.DE,MUV2.DE,RWE.DE,SAP.DE,SIE.DE,TKA.DE,VOW3.DE").split(",")

WEEKS = 52


def make(path, names, seed, drift_lo, drift_hi, factor_sd):
    rng = random.Random(seed)
    # Index constituents move together: tight beta dispersion around 1 and
    # idiosyncratic noise well below the market factor, with a few risk-off
    # weeks mixed in so the loss tail is dominated by market scenarios.
    beta = [rng.uniform(0.8, 1.2) for _ in names]
    idio = [rng.uniform(0.010, 0.022) for _ in names]
    mu = [rng.uniform(drift_lo, drift_hi) for _ in names]
    factors = []
    for _ in range(WEEKS):
        f = rng.gauss(0.002, factor_sd)
        if rng.random() < 0.08:  # occasional sell-off week
            f -= rng.uniform(0.02, 0.05)
        factors.append(f)
    with open(path, "w") as out:
        out.write("week," + ",".join(names) + "\n")
        for week, f in enumerate(factors, start=1):
            row = [f"W{week:02d}"]
            for j in range(len(names)):
                r = mu[j] + beta[j] * f + rng.gauss(0.0, idio[j])
                r = max(r, -0.45)  # keep simple returns sane
                row.append(f"{r:.6f}")
            out.write(",".join(row) + "\n")


if __name__ == "__main__":
    make("data/us30_weekly.csv", US, seed=20120106, drift_lo=-0.002, drift_hi=0.006, factor_sd=0.018)
    make("data/eu30_weekly.csv", EU, seed=20130104, drift_lo=-0.001, drift_hi=0.007, factor_sd=0.020)
    print("fixtures written")
