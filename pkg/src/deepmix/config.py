"""Resource caps for dense linear algebra.

These are module-level defaults rather than hard constants; callers that
know what they are doing may raise them at runtime. Every cap guards a
dense allocation: permutation operators live on a D_A**k dimensional
space, statevectors on 2**n amplitudes, and the measurement-outcome loop
enumerates all 2**|B| bitstrings.
"""

# Largest k for which the symmetric group S_k is enumerated (7! = 5040).
MAX_PERM_K = 7

# Largest dimension for dense operators (moment operators, sampled
# unitaries). 4096 x 4096 complex128 is ~256 MB.
MAX_OPERATOR_DIM = 4096

# Largest qubit count for statevector evolution (auxiliary register
# included). 2**22 amplitudes is ~64 MB.
MAX_STATE_QUBITS = 22

# Largest measured-subsystem size for dense outcome enumeration.
MAX_DENSE_OUTCOME_QUBITS = 14
