"""
Unit tests for prediction bundles
"""

import json

import pytest

from srs_weakness.bundle import MANIFEST_NAME, STOPWORDS_NAME, load_bundle, save_bundle, train_bundle
from srs_weakness.classifiers import ClassifierSettings, MlpConfig
from srs_weakness.errors import RefuseOverwriteError, VersionMismatchError

FAST = ClassifierSettings(mlp=MlpConfig(epochs=5, hidden_sizes=(16,)))


@pytest.mark.unit
class TestBundle:
    """Test cases for training, saving and loading bundles"""

    @pytest.fixture
    def saved(self, tmp_path, labeled_dataset, synthetic_catalog):
        bundle = train_bundle(labeled_dataset, "mlp", "latent", FAST, k=8, catalog=synthetic_catalog)
        directory = save_bundle(bundle, tmp_path / "bundle")
        return bundle, directory

    def test_manifest(self, saved, labeled_dataset):
        bundle, directory = saved

        manifest = json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8"))

        assert manifest["algorithm"] == "mlp"
        assert manifest["feature_kind"] == "latent"
        assert manifest["k"] == 8
        assert manifest["class_set"] == [100, 200, 300, 400]
        assert manifest["dataset_sha256"] == labeled_dataset.content_hash()
        assert manifest["category_names"]["200"] == "Injection"
        assert (directory / manifest["model_file"]).is_file()

    def test_loaded_bundle_predicts_the_same(self, saved, labeled_dataset):
        bundle, directory = saved

        loaded = load_bundle(directory)

        assert loaded.predict(labeled_dataset.texts) == bundle.predict(labeled_dataset.texts)
        assert loaded.category_name(300) == "Authentication Errors"

    def test_predictions_within_class_set(self, saved):
        bundle, _ = saved

        labels = bundle.predict(["The system shall encrypt keys", "zebra", "Reports are printed weekly"])

        assert set(labels) <= {100, 200, 300, 400}

    def test_empty_input(self, saved):
        bundle, _ = saved
        assert bundle.predict([]) == []

    def test_refuses_non_empty_directory(self, saved):
        bundle, directory = saved
        with pytest.raises(RefuseOverwriteError):
            save_bundle(bundle, directory)
        save_bundle(bundle, directory, force=True)

    def test_stopword_change_detected(self, saved):
        _, directory = saved
        (directory / STOPWORDS_NAME).write_text("only\nthese\n", encoding="utf-8")

        with pytest.raises(VersionMismatchError):
            load_bundle(directory)

    def test_vocabulary_change_detected(self, saved):
        _, directory = saved
        manifest_path = directory / MANIFEST_NAME
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest["vocab_sha256"] = "0" * 64
        manifest_path.write_text(json.dumps(manifest), encoding="utf-8")

        with pytest.raises(VersionMismatchError):
            load_bundle(directory)

    def test_format_change_detected(self, saved):
        _, directory = saved
        manifest_path = directory / MANIFEST_NAME
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest["format"] = 99
        manifest_path.write_text(json.dumps(manifest), encoding="utf-8")

        with pytest.raises(VersionMismatchError):
            load_bundle(directory)

    @pytest.mark.parametrize("algorithm,kind", [("multinomial_nb", "counts"), ("decision_tree", "tfidf")])
    def test_non_latent_bundles(self, tmp_path, labeled_dataset, algorithm, kind):
        bundle = train_bundle(labeled_dataset, algorithm, kind, FAST)
        directory = save_bundle(bundle, tmp_path / algorithm)

        loaded = load_bundle(directory)

        assert loaded.manifest["k"] is None
        assert loaded.predict(labeled_dataset.texts[:5]) == bundle.predict(labeled_dataset.texts[:5])
