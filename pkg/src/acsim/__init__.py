"""Deterministic acoustic-content simulation for speech separation:
data generation, multi-objective PIT losses, and SI-SDR evaluation."""

from .audio import AudioClip, AudioError
from .acoustic import (
    AcousticPlan,
    RirAugmentParams,
    RoomImpulseResponse,
    apply_plan,
    augment_rir,
    draw_acoustic_plan,
)
from .catalog import AssetCatalog, CatalogError, load_catalog, read_wav, write_wav
from .config import ScenarioSpec, SimulationConfig
from .content import (
    MixtureExample,
    SpliceMap,
    assemble_example,
    random_split,
    remove_event_overlap,
    select_content,
)
from .dataset import GenerationJob, evaluate_set, generate_set
from .dsp import (
    ConfigError,
    MelConfig,
    StftConfig,
    apply_gain_envelope,
    fft_convolve,
    mel_spectrogram,
    peaking_eq,
    resample,
    stft_magnitude,
)
from .objectives import (
    LossBreakdown,
    LossWeights,
    PitScore,
    combined_loss,
    improvement,
    mel_loss,
    mstft_loss,
    pit_resolve,
    si_sdr,
    silence_sdr,
    time_l2_loss,
)
from .rng import NumpyStream, example_seed

__version__ = "0.1.0"
