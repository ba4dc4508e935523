"""ncml: reliable wireless broadcast over lossy forward and feedback links.

A Monte-Carlo simulator and library covering four retransmission schemes
(ARQ, ARQ-ML, NC, NC-ML), a suburban path-loss channel with abstract and
scripted alternatives, a feedback-corruption model, four from-scratch
classifier families with a selection loop, the effective-throughput metric,
and an experiment harness with a CLI.
"""

from .channel import (
    AbstractChannel,
    ChannelMode,
    LinkBudget,
    LinkGeometry,
    Modulation,
    PhysicalChannel,
    ScriptedChannel,
    ShadowingDraw,
    TerrainCategory,
    TerrainParams,
    TERRAIN_PRESETS,
    terrain_preset,
)
from .feedback import (
    DecodeOutcome,
    FeedbackEnv,
    FeedbackFeatures,
    FeedbackObservation,
    LabeledExample,
    TransmitterView,
    TrueState,
    generate_feedback,
    harvest_labels,
    transmitter_view,
)
from .learn import (
    ClassifierModel,
    Dataset,
    ModelFamily,
    SplitSpec,
    choose_attributes,
    evaluate,
    load_model,
    predict,
    save_model,
    split,
    train,
    train_select,
)
from .metrics import ThroughputResult, TrialRecord, effective_throughput
from .protocol import (
    CodedPacket,
    Packet,
    PacketState,
    PacketStateMap,
    ReceiverState,
    Scheme,
    SchemeConfig,
    TrialTrace,
    run_trial,
    select_combination,
    trial_rng,
    try_decode,
    xor_combine,
)

__version__ = "0.1.0"
