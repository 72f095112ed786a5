"""
PFSR Simulator
Streamlit Application - configure, run and browse small memory experiments
"""

import sys
from pathlib import Path

import streamlit as st

# Add src directory to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from config_loader import dumps_config, load_config
from experiment_models import ChannelSpec, ConfigError, ExperimentConfig, ExperimentKind
from experiments import get_runner
from experiments.validation import validate_config
from report_builder import build_report
from results_store import plot_data

CONFIG_DIR = Path(__file__).parent / "configs"
# The interactive front-end keeps runs short
MAX_APP_SHOTS = 5000

# Page config
st.set_page_config(page_title="PFSR Simulator", page_icon="🧮", layout="wide")

# Initialize session state
if "output" not in st.session_state:
    st.session_state.output = None
if "config" not in st.session_state:
    st.session_state.config = None

st.title("🧮 PFSR Simulator")
st.markdown("**Surface-code memory experiments with non-Pauli noise**")
st.markdown("---")

# Sidebar configuration
with st.sidebar:
    st.header("⚙️ Experiment")

    presets = sorted(CONFIG_DIR.glob("*.json5"))
    preset = st.selectbox("Start from preset", ["(none)"] + [p.name for p in presets])
    base = load_config(CONFIG_DIR / preset) if preset != "(none)" else None

    kinds = [k.value for k in ExperimentKind if k != ExperimentKind.ORACLE_SUITE]
    kind = st.selectbox("Kind", kinds, index=kinds.index(base.kind.value) if base and base.kind.value in kinds else 0)

    st.subheader("Code")
    distances = st.multiselect("Distances", [3, 5, 7], default=base.distances if base else [3, 5])
    noise_model = st.selectbox(
        "Noise model",
        ["phenomenological", "circuit_layered", "circuit_parallel"],
        index=["phenomenological", "circuit_layered", "circuit_parallel"].index(base.noise_model.value) if base else 0,
    )
    basis = st.radio("Memory basis", ["Z", "X"], horizontal=True)

    st.markdown("---")
    st.subheader("Noise")
    channel_kind = st.selectbox(
        "Channel",
        ["depolarizing", "amplitude_damping", "coherent_z", "bit_flip", "phase_flip"],
        index=["depolarizing", "amplitude_damping", "coherent_z", "bit_flip", "phase_flip"].index(base.channel.kind.value)
        if base and base.channel else 1,
    )
    mode = st.selectbox("Mode", ["exact", "pta", "quasiprobability"])
    grid_text = st.text_input(
        "Grid (physical rates, comma separated)",
        value=", ".join(f"{p:g}" for p in base.grid) if base else "0.05, 0.07, 0.09",
        help="p for depolarizing, γ for amplitude damping, sin²(θ/2) for coherent rotations",
    )
    epsilon = st.number_input("Truncation ε", value=0.0, min_value=0.0, format="%.1e")

    st.markdown("---")
    st.subheader("Sampling")
    shots = st.slider("Shots per point", min_value=100, max_value=MAX_APP_SHOTS, value=500, step=100)
    seed = st.number_input("Seed", value=base.seed if base else 12345, min_value=0)
    workers = st.number_input("Workers", value=1, min_value=1, max_value=32)


def current_config() -> ExperimentConfig:
    """Build the config from the sidebar widgets"""
    grid = [float(v) for v in grid_text.replace(";", ",").split(",") if v.strip()]
    extra = {}
    if kind == ExperimentKind.TRUNCATION_SWEEP.value:
        extra["epsilons"] = base.epsilons if base and base.epsilons else [0.0, 1e-4]
    if kind == ExperimentKind.IMPORTANCE_SAMPLING.value:
        extra["budget"] = shots * 10
        extra["importance"] = vars(base.importance) if base and base.importance else {"p_targets": [grid[-1]]}
    return ExperimentConfig(
        experiment_id=f"app_{kind}",
        kind=kind,
        distances=sorted(distances),
        grid=grid,
        channel=ChannelSpec(channel_kind, mode),
        noise_model=noise_model,
        basis=basis,
        epsilon=epsilon,
        shots=None if kind == ExperimentKind.IMPORTANCE_SAMPLING.value else shots,
        seed=int(seed),
        workers=int(workers),
        **extra,
    )


col_main, col_side = st.columns([3, 1])

with col_main:
    col_check, col_run = st.columns(2)
    with col_check:
        check_clicked = st.button("🔍 Validate", use_container_width=True)
    with col_run:
        run_clicked = st.button("▶️ Run", type="primary", use_container_width=True)

    try:
        config = current_config()
    except (ConfigError, ValueError) as e:
        config = None
        st.error(f"Config error: {e}")

    if config is not None and check_clicked:
        report = validate_config(config)
        for line in report.lines():
            if line.startswith("✓"):
                st.success(line)
            elif line.startswith("Warning"):
                st.warning(line)
            else:
                st.error(line)

    if config is not None and run_clicked:
        with st.spinner("Running trajectories..."):
            try:
                st.session_state.output = get_runner(config).run()
                st.session_state.config = config
                st.success("✓ Run complete")
            except (RuntimeError, ValueError) as e:
                st.error(f"Error: {str(e)}")

    output = st.session_state.output
    if output is not None:
        frame = output.results_table()
        if not frame.empty:
            st.subheader("Logical error rates")
            long = plot_data(frame)
            chart = long.assign(curve=long["series"] + " d=" + long["d"].astype(str))
            st.line_chart(chart.pivot_table(index="param", columns="curve", values="rate"))
            st.dataframe(frame, use_container_width=True)

            report = build_report(frame, n_boot=100, seed=int(seed))
            st.subheader("Thresholds")
            st.code(report.render())

        for name, table in output.tables.items():
            st.subheader(name.replace("_", " ").title())
            st.dataframe(table, use_container_width=True)
        for message in output.messages:
            st.text(message)

with col_side:
    st.header("📊 Export")
    output = st.session_state.output
    if output is not None:
        st.download_button(
            label="⬇️ results.csv",
            data=output.results_table().to_csv(index=False),
            file_name="results.csv",
            mime="text/csv",
            use_container_width=True,
        )
        for name, table in output.tables.items():
            st.download_button(
                label=f"⬇️ {name}.csv",
                data=table.to_csv(index=False),
                file_name=f"{name}.csv",
                mime="text/csv",
                use_container_width=True,
            )
        st.download_button(
            label="⬇️ config.json5",
            data=dumps_config(st.session_state.config),
            file_name=f"{st.session_state.config.experiment_id}.json5",
            use_container_width=True,
        )
    else:
        st.info("Run an experiment to export results")

st.markdown("---")
st.caption("PFSR Simulator v1.0 | `python cli.py run --config configs/<name>.json5` for full-size runs")
