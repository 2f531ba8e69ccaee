"""Token-domain video transmission simulator.

Key frames are tokenized into importance-ordered codes, differentially coded
against the previous key frame, truncated to a channel-adaptive top-K prefix,
packed, sent over a modulated AWGN link and decoded from a running token
state at the receiver.
"""
from .diff_coder import ChangeMask, FramePacket, change_mask, frame_cost, pack, unpack
from .phy import AcmTable, ChannelEstimate, McsEntry, awgn, demodulate, modulate, select_mcs
from .rate_planner import allocate_symbols, deliverable_bits, max_feasible_k, plan_gop
from .receiver import ReceiverState, Status, receive_frame, reconstruct
from .sampler import interpolate, key_indices, neighbors
from .sim import SimConfig, run, sweep
from .tokenizer import (ZERO_TOKEN, Frame, TokenizerConfig, TokenSequence, detokenize,
                        tokenize, zero_state)

__version__ = "0.1.0"
