"""Quantum Tsallis entropies, Choi states and staged common-cause channels."""
from .channels import (Check, ChoiState, ConjectureReport, KrausChannel, StagedChannel, choi_state, cq_state,
                       random_staged_channel, search_conjecture_counterexamples, search_mixed_ssa_violation,
                       staged_cmi, tau_state, verify_cq_theorem, verify_sigma_lemma, verify_stage1,
                       verify_stage2, verify_stage3_onesided)
from .states import (DensityOperator, haar_random_unitary, is_povm, matrix_to_pairs, max_entangled,
                     pairs_to_matrix, partial_trace, pure_state_marginal, quantum_cmi, quantum_mi,
                     quantum_tsallis, random_density_operator, random_povm, random_pure_state)
