"""Smoke test for the vcot Python bindings: the full sample, train and
infer loop on a few scenes, plus the metric primitives."""

import math
import os
import tempfile

import vcot


def main():
    assert math.isclose(vcot.iou((0, 0, 10, 10), (5, 0, 15, 10)), 1 / 3)
    assert vcot.uncertainty_reduction([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == 0.5
    assert math.isclose(vcot.action_entropy([3] * 7), math.log(7))
    assert vcot.topk_mean([0.1, 0.5, 0.3]) == 0.5
    assert math.isclose(vcot.ucb_bonus(2, 0, 1.0), math.sqrt(math.log(2)))

    model = vcot.RewardModel.zeros()
    policy, reward = model.forward([0.0] * 20)
    assert all(math.isclose(p, 1 / 7) for p in policy) and reward == 0.5
    try:
        model.forward([0.0] * 3)
    except ValueError:
        pass
    else:
        raise AssertionError("short feature vector accepted")

    with tempfile.TemporaryDirectory() as tmp:
        scenes = os.path.join(tmp, "scenes.jsonl")
        data = os.path.join(tmp, "data.jsonl")
        weights = os.path.join(tmp, "rm.bin")

        specs = vcot.random_scenes(5, seed=3, out=scenes)
        assert [s["image_id"] for s in specs] == [f"scene-{i:04d}" for i in range(5)]

        summary = vcot.sample(scenes, data, policy="ucb", seed=1)
        assert summary["images"] == 5 and summary["steps"] > 0
        records = vcot.load_dataset(data)
        assert len(records) == 5 and len(records[0]["transition_posterior"]) == 8

        losses = vcot.train_rm(data, weights, epochs=5, seed=1)
        assert len(losses) == 5 and all(math.isfinite(v) for v in losses)
        assert vcot.RewardModel.load(weights).num_params == 6024

        for mode in ["policy", "reward", "hybrid", "random"]:
            traces = vcot.infer(scenes, rm=weights, mode=mode, seed=1)
            assert len(traces) == 5
            assert all(len(t["actions"]) <= 7 for t in traces)
        again = vcot.infer(scenes, rm=weights, mode="hybrid", seed=1)
        assert again == vcot.infer(scenes, rm=weights, mode="hybrid", alpha=0.5, seed=1)

        try:
            vcot.load_dataset(os.path.join(tmp, "missing.jsonl"))
        except OSError:
            pass
        else:
            raise AssertionError("missing file accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
