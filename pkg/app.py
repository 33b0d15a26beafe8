"""
Articulation Run Viewer - Main Entry Point
관절 복원 실행 결과 뷰어 - 메인 앱

    streamlit run app.py -- [RUNS_ROOT]
"""
from pathlib import Path
import os
import sys

import streamlit as st

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import PAGE_CONFIG
from components import (
    build_joint_table,
    create_joint_error_chart,
    create_loss_chart,
    create_part_count_chart,
    create_pointcloud_chart,
    loss_terms,
)
from evaluation import metrics_table
from reconstruction_pipeline import RESULT_FILE, articulate, read_run


st.set_page_config(
    page_title=PAGE_CONFIG['page_title'],
    page_icon=PAGE_CONFIG['page_icon'],
    layout=PAGE_CONFIG['layout'],
    initial_sidebar_state=PAGE_CONFIG['initial_sidebar_state'],
)


def _initialize_session_state() -> None:
    if 'ui_state' not in st.session_state:
        st.session_state['ui_state'] = {
            'runs_root': sys.argv[1] if len(sys.argv) > 1 else 'runs',
            'fraction': 1.0,
            'log_y': True,
        }


@st.cache_data(show_spinner=False)
def find_runs(root: str) -> list:
    """Run directories (containing result.json) below ``root``."""
    base = Path(root)
    if not base.is_dir():
        return []
    return sorted(str(p.parent) for p in base.rglob(RESULT_FILE))


@st.cache_data(show_spinner=False)
def load_run(directory: str):
    return read_run(directory)


def _render_sidebar() -> str:
    ui_state = st.session_state['ui_state']

    with st.sidebar:
        st.title("Run Viewer")
        root = st.text_input("실행 결과 폴더", value=ui_state['runs_root'])
        ui_state['runs_root'] = root
        runs = find_runs(root)
        if not runs:
            st.info("result.json 이 있는 실행 폴더가 없습니다.")
            return ''
        selected = st.selectbox("실행 선택", options=runs)

        ui_state['fraction'] = st.slider("상태 (0 = 초기, 1 = 이동 후)", 0.0, 1.0,
                                         value=ui_state['fraction'], step=0.05)
        ui_state['log_y'] = st.checkbox("로그 스케일 손실", value=ui_state['log_y'])
        if st.button("새로고침", type="primary", use_container_width=True):
            st.cache_data.clear()
            st.rerun()
    return selected


_initialize_session_state()
selected_run = _render_sidebar()

st.title("관절 물체 복원 결과")
if not selected_run:
    st.stop()

try:
    run = load_run(selected_run)
except (OSError, ValueError) as error:
    st.error(f"로드 실패: {error}")
    st.stop()

result = run.result
ui_state = st.session_state['ui_state']
st.caption(f"{run.name} · {run.directory}")

cols = st.columns(4)
cols[0].metric("상태", result.get('status', '-'))
cols[1].metric("부분 수", result.get('part_count', 0))
cols[2].metric("반복", result.get('iterations', 0))
cols[3].metric("주기", result.get('cycles', 0))

left, right = st.columns([3, 2])
with left:
    cloud = articulate(run.pred_state0.points, run.pred_state0.labels, run.motions, ui_state['fraction'])
    st.plotly_chart(
        create_pointcloud_chart(cloud.points, cloud.labels, result.get('parts'),
                                title=f"t = {ui_state['fraction']:.2f}"),
        use_container_width=True,
    )
with right:
    st.subheader("관절")
    st.dataframe(build_joint_table(result), use_container_width=True, hide_index=True)
    if run.metrics is not None:
        st.subheader("평가 지표")
        st.dataframe(metrics_table(run.name, run.metrics), use_container_width=True, hide_index=True)
        st.plotly_chart(create_joint_error_chart(run.metrics), use_container_width=True)
        if run.metrics.get('flags'):
            st.warning("F: " + ', '.join(run.metrics['flags']))
    else:
        st.caption("metrics.json 없음 - `python cli.py eval` 로 생성")

if run.loss.empty:
    st.info("loss.csv 가 비어 있습니다 (정적 물체).")
else:
    terms = st.multiselect("손실 항목", options=loss_terms(run.loss), default=['total'])
    st.plotly_chart(
        create_loss_chart(run.loss, terms, log_y=ui_state['log_y'], events=run.events),
        use_container_width=True,
    )
    st.plotly_chart(create_part_count_chart(run.loss, run.events), use_container_width=True)
