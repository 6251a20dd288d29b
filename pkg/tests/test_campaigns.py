import pytest

from qg3.campaigns import run_campaign


@pytest.mark.parametrize("name,trials", [("prop1", 30), ("lemma3", 6), ("lemma4", 4), ("trotter", 6), ("closure", 1)])
def test_campaigns_pass(name, trials):
    rep = run_campaign(name, trials, seed=1, **({"n": 1} if name == "closure" else {}))
    assert rep.all_passed
    assert rep.worst_margin >= 0
    assert len(rep.to_json()["trials"]) == trials


def test_parallel_matches_serial():
    a = run_campaign("prop1", 12, seed=4)
    b = run_campaign("prop1", 12, seed=4, workers=4)
    assert a.to_json() == b.to_json()


def test_trial_seeds_are_offsets():
    rep = run_campaign("trotter", 3, seed=10)
    assert [t.seed for t in rep.trials] == [10, 11, 12]


def test_bad_campaign_arguments():
    with pytest.raises(KeyError):
        run_campaign("nope", 1, 0)
    with pytest.raises(ValueError):
        run_campaign("prop1", 0, 0)
