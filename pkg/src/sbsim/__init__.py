"""Classical simulation and statistical validation of (scattershot) boson sampling."""

from .permanent import (permanent_naive, permanent_ryser, permanent_glynn,
                        permanents_close, PermanentSizeError)
from .interferometer import (Coupler, Phase, CircuitLayout, NoiseSpec,
                             haar_random_unitary, compile_layout,
                             random_chip_layout, perturb_layout,
                             unitarity_deviation, submatrix,
                             save_unitary, load_unitary, save_layout, load_layout)
from .distribution import (OutputDistribution, prob_indistinguishable,
                           prob_distinguishable, prob_partial,
                           full_distribution, uniform_distribution,
                           sample_output, enumerate_outputs)
from .scattershot import (Source, FixedPair, Switcher, SourceBank, Event,
                          RateEstimate, RuntimeComparison, generate_events,
                          enumerate_combinations, mix_fixed_input_datasets,
                          scattershot_event_probability, runtime_estimate,
                          default_bank_13, save_bank, load_bank,
                          write_event_log, read_event_log, PAPER_PRESET)
from .validation import (CounterTrajectory, ValidationReport, SuccessCurve,
                         NoiseBandTable, aa_discriminator, aa_threshold,
                         aa_test, likelihood_ratio_test, success_curve,
                         noise_bands, inject_spurious)

__version__ = "0.1.0"
