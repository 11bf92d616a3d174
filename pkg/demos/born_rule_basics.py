"""Process matrices and the generalized Born rule.

A process matrix W assigns joint probabilities to the local operations of
two parties through P(i, j) = Tr[W (M_i (x) M_j)], where each operation is
a CJ matrix on the party's input and output.  This script builds a few
canonical processes and instruments and checks the probabilities they
produce.
"""

import numpy as np

from procmat import (
    Instrument,
    born_probability,
    channel_process,
    check_instrument,
    identity_process,
    measure_reprepare,
    probability_table,
    random_process,
    validate_process,
)

e = np.eye(2, dtype=complex)

# The maximally noisy process: every outcome pair is equally likely.
noise = identity_process()
measure_z = Instrument(tuple(measure_reprepare(e[:, x], e[:, 0]) for x in range(2)))
print("maximally noisy process, both parties measure z:")
print(probability_table(noise, measure_z, measure_z).entries)

# A perfect channel: Alice's repreparation lands in Bob's input intact.
chan = channel_process()
print("\nperfect channel from Alice to Bob:")
for sent in range(2):
    alice = Instrument(tuple(measure_reprepare(e[:, x], e[:, sent]) for x in range(2)))
    table = probability_table(chan, alice, measure_z)
    bob_marginal = table.entries.sum(axis=0)
    print(f"  Alice sends |{sent}>, Bob reads: {np.round(bob_marginal, 12)}")

# Validation separates processes from arbitrary Hermitian matrices: a term
# coupling the two outputs breaks probability normalization.
w = random_process(seed=1)
report = validate_process(w)
print("\nrandom process: valid =", report.overall,
      "| min eigenvalue =", f"{report.min_eigenvalue:.2e}",
      "| trace =", report.trace_value)

instr = Instrument(tuple(measure_reprepare(e[:, x], e[:, 1]) for x in range(2)))
print("instrument completeness:", check_instrument(instr).overall)
print("single outcome probability:",
      born_probability(w, instr.outcomes[0], measure_z.outcomes[1]))
total = probability_table(w, instr, measure_z).total
print("table total (must be 1):", total)
