from .autoencoder import autoencode, build_autoencoder, loss_ad, loss_ad_batch
from .switching import (MODE_OP, MODE_VP, SelectorState, calibrate_beta, filter_update,
                        make_selector, min_flip_ticks, select_latent, trace_line,
                        trace_record)

__all__ = [
    "autoencode", "build_autoencoder", "loss_ad", "loss_ad_batch", "MODE_OP",
    "MODE_VP", "SelectorState", "calibrate_beta", "filter_update", "make_selector",
    "min_flip_ticks", "select_latent", "trace_line", "trace_record",
]
