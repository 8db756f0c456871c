# Copyright 2026 The nneq Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json

import pytest

import nneq


@pytest.fixture
def canonical():
    return nneq.MarketParams(v=3.5, v_star=2.0, t=1.0, c=1.0)


def test_solve_canonical(canonical):
    report = nneq.solve_spe(canonical)
    assert report.fees.p_tilde == pytest.approx(1.25, abs=1e-9)
    assert report.fees.q_N == pytest.approx(1.75, abs=1e-9)
    assert report.fees.q_NN == pytest.approx(1.5, abs=1e-9)
    assert (report.split.n_N, report.split.n_NN) == pytest.approx((0.25, 0.75))
    assert report.payoffs.pi_NN == pytest.approx(1.125, abs=1e-9)
    assert report.payoffs.pi_G == pytest.approx(0.625, abs=1e-9)
    assert report.branch.branch == nneq.Branch.B3
    assert report.p_tilde_plateau
    assert json.loads(report.to_json())["payoffs"]["pi_N"] == 0.125


def test_given_fee(canonical):
    neutral = nneq.solve_spe(canonical, p_tilde=0.0)
    assert neutral.split.n_N == 0.5
    assert neutral.fees.p_N == neutral.fees.p_NN == 2.0
    deep = nneq.solve_spe(canonical, p_tilde=10.0)
    assert deep.payoffs.pi_NN == pytest.approx(1.125)
    assert deep.payoffs.pi_G == pytest.approx(-8.125)


def test_stage_functions(canonical):
    assert nneq.stage3_prices(canonical, 1.25, 1.75, 1.5) == pytest.approx((1.5, 1.25))
    split = nneq.stage4_shares_reduced(canonical, 1.25, 1.75, 1.5)
    assert split.n_N == pytest.approx(0.25)
    cp = nneq.cp_best_response(canonical, -2.0)
    assert cp.branch == nneq.Branch.B1
    assert cp.delta_q_e == pytest.approx(-0.5)
    assert nneq.stage1_payoff(canonical, 0.0) == pytest.approx(0.5)
    fees = nneq.StrategyProfile(q_N=0.0, q_NN=0.1, p_N=1.0, p_NN=1.2)
    x, interior = nneq.indifferent_user(canonical, fees)
    assert x == pytest.approx(0.65) and interior


def test_oracles(canonical):
    fees = nneq.solve_spe(canonical).fees
    sim = nneq.simulate_users(canonical, fees, users=100000)
    assert sim.n_N == pytest.approx(0.25, abs=1e-4)
    q_N, q_NN, _ = nneq.cp_argmax_oracle(canonical, 1.25, steps=401)
    assert q_N == pytest.approx(1.75, abs=0.01)
    assert q_NN == pytest.approx(1.5, abs=0.01)
    verdicts = nneq.verify(canonical, nneq.Stage.Stage4)
    assert verdicts and all(v.passed for v in verdicts)


def test_invalid_params():
    with pytest.raises(ValueError):
        nneq.MarketParams(v=3.5, v_star=2.0, t=0.0, c=1.0)


def test_run_cli():
    code, out, err = nneq.run_cli(["solve", "--format", "csv"])
    assert code == 0 and err == ""
    assert out.splitlines()[1].startswith("1.25,1.75,1.5,1.5,1.25,")
    code, _, err = nneq.run_cli(["solve", "--t", "-1"])
    assert code == 2 and err
