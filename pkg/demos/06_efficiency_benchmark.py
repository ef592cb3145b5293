"""Efficiency accounting: parameter and multiply counts of the
separable model against its dense-temporal-convolution twin, plus wall
times and Welch's t-test.

Run:  python3 demos/06_efficiency_benchmark.py
"""
from fallgcn import (
    MaskingConfig,
    ModelConfig,
    ThreeStreamModel,
    benchmark_pair,
    builtin_layout,
    count_flops,
    count_parameters,
    normalized_adjacency,
    welch_t_test,
)

layout = builtin_layout("coco18")
norm_adj = normalized_adjacency(layout)


def build(tcn: str) -> ThreeStreamModel:
    config = ModelConfig(
        dims=2, clip_len=64, joint_count=18, num_classes=2,
        masking=MaskingConfig(0.0, 0.0), tcn=tcn, layout_name="coco18",
    )
    return ThreeStreamModel(config, norm_adj)


separable = build("separable")
dense = build("dense")

print("full-size model (channels 64 -> 128, T=64, V=18):")
print(f"{'variant':<12}{'parameters':>12}{'multiplies/clip':>18}")
for name, model in (("separable", separable), ("dense", dense)):
    print(f"{name:<12}{count_parameters(model):>12,}{count_flops(model):>18,}")
p_save = 1 - count_parameters(separable) / count_parameters(dense)
f_save = 1 - count_flops(separable) / count_flops(dense)
print(f"separable saves {p_save:.1%} parameters and {f_save:.1%} multiplies\n")

# Interleaved single-clip timing; alternating the variants keeps load
# drift from biasing either sample.
print("timing 60 single-clip forwards per variant (interleaved)...")
sep_lat, dense_lat = benchmark_pair(separable, dense, n_warmup=10, n_samples=60)
t_stat, df = welch_t_test(sep_lat.times_ms, dense_lat.times_ms)

print(f"{'variant':<12}{'mean [ms]':>12}{'std [ms]':>12}")
print(f"{'separable':<12}{sep_lat.mean:>12.3f}{sep_lat.std:>12.3f}")
print(f"{'dense':<12}{dense_lat.mean:>12.3f}{dense_lat.std:>12.3f}")
print(f"\nWelch's t = {t_stat:.3f} with {df:.1f} degrees of freedom")
print("(multiply counts are the hardware-independent comparison; wall "
      "times depend on BLAS, cache, and machine load)")
