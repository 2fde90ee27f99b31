from . import _nyspcg as _module

AdaptiveConfig = _module.AdaptiveConfig
AdaptiveOutcome = _module.AdaptiveOutcome
RankSelectionMode = _module.RankSelectionMode
adaptive_nystrom = _module.adaptive_nystrom
adaptive_nystrom_ratio = _module.adaptive_nystrom_ratio
estimate_error_power = _module.estimate_error_power
fixed_rank_nystrom = _module.fixed_rank_nystrom
posterior_condition_estimate = _module.posterior_condition_estimate
select_rank = _module.select_rank
