"""Built-in scenarios for the four BER experiments (CM1, band group 1)."""

FIG5 = """\
name = fig5
channel = CM1
user = 1 hard 480
user = 2 soft 400
user = 3 soft 400
snr_start = 8
snr_stop = 20
snr_step = 2
realizations = 200
min_errors = 300
max_bits = 3e6
seed = 5
"""

FIG6 = """\
name = fig6
channel = CM1
user = 1 hard 320
user = 2 soft 320
user = 3 soft 320
baseline = yes
baseline_rate = 320
snr_start = 2
snr_stop = 14
snr_step = 1
realizations = 200
min_errors = 300
max_bits = 3e6
seed = 6
"""

FIG7 = """\
name = fig7
channel = CM1
user = 1 hard 320 weight=0.4
user = 2 hard 320 weight=0.3
user = 3 soft 320 weight=0.15
user = 4 soft 320 weight=0.15
baseline = yes
baseline_rate = 320
snr_start = 2
snr_stop = 14
snr_step = 1
realizations = 200
min_errors = 300
max_bits = 3e6
seed = 7
"""

FIG8 = """\
name = fig8
channel = CM1
user = 1 hard 320
user = 2 soft 320
user = 3 soft 320
baseline = yes
baseline_rate = 320
snr_start = 2
snr_stop = 12
snr_step = 1
realizations = 200
min_errors = 200
max_bits = 1e6
seed = 8
ratios = 0,0.25,0.5,1,2,4,10
"""

PRESETS = {"fig5": FIG5, "fig6": FIG6, "fig7": FIG7, "fig8": FIG8}
