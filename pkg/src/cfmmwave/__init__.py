"""Monte Carlo link-level simulator for cell-free and user-centric mmWave massive MIMO."""

from .config import (ConfigError, PathlossParams, SimConfig, UMI_PROFILES,
                     from_dict, noise_power_w, preset, to_dict, validate)
from .scenario import (ScattererField, ScattererRay, ScenarioRealization,
                       active_rays, build_realization, draw_los_indicators,
                       generate_scatterers, place_entities)
from .channel import (ChannelMatrix, ChannelSet, assemble_channel, los_probability,
                      path_loss_db, steering_vector, synthesize_channels)
from .training import (PilotBook, estimate_all, estimate_effective, generate_pilots,
                       perfect_csi_effective, training_rx)
from .beamform import (AssociationSets, HybridResult, hybrid_decompose, ms_beamformer,
                       power_coefficients_dl, power_coefficients_ul, uc_select,
                       zf_precoder, zf_precoders_all)
from .link import (EffectiveLink, RateRecord, achievable_rate, downlink_effective,
                   scale_transmit_power, uplink_effective)
from .harness import SweepResult, aggregate, emit, load_results, run_trial, sweep

__version__ = "0.1.0"
