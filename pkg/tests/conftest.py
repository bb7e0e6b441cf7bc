from hypothesis import settings

# derandomized so the whole suite is reproducible run to run
settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")
