"""Nuisance-parameter QFI for (|10> + |50>)/sqrt(2), and the QFI cost of a shift at the critical phase."""

import argparse
from pathlib import Path

from nonlin_metrology.generators import kerr
from nonlin_metrology.hilbert import SpectrumSet, superposition
from nonlin_metrology.qfi import loglog_slope, qfi_difference_scaling
from nonlin_metrology.sweeps import parse_config, run_qfi_curves


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    table = run_qfi_curves(parse_config({}, "qfi"))
    table.to_csv(out / "qfi_curves.csv")
    for row in table.select(k=1).rows():
        print(
            f"z={row['z']:<5g} I_phiphi={row['i_phiphi']:.4g} J(matrix)={row['effective_J_matrix']:.4g} "
            f"closed form={row['printed_closed_form']:.4g}"
        )

    psi = superposition(SpectrumSet.bosonic(11), [2, 10])
    pairs = qfi_difference_scaling(kerr(), 1, psi, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    for eps, delta in pairs:
        print(f"eps={eps:.0e}  |I(psi) - I(upsilon)| = {delta:.4e}")
    print(f"log-log slope {loglog_slope(pairs):.3f}")


if __name__ == "__main__":
    main()
