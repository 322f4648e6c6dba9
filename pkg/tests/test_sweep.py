"""Tests for sweeps, the results store and the sweep state file."""

import os
import shutil
import sys
import tempfile
import unittest

import pandas as pd
import yaml

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from meta_transition.config_manager import ConfigManager
from meta_transition.errors import DatasetParseError, InvalidConfigError, InvalidInputError
from meta_transition.pipeline import (
    CellStatus, ExperimentRecord, ResultsStore, SweepManifest, SweepProcessor,
    SweepStateManager, summarize_records,
)
from meta_transition.pipeline.results import cell_key
from tests.cli_helpers import read_bytes, run_cli, write_config


def _record(method='ce', rate=0.2, seed=1, acc=0.5, err=None):
    return ExperimentRecord(method, 'symmetric', rate, seed, acc, err, 1.0, None)


class TestResultsStore(unittest.TestCase):
    """Append-only CSV."""

    def setUp(self):
        """Temporary results path."""
        self.temp_dir = tempfile.mkdtemp()
        self.store = ResultsStore(os.path.join(self.temp_dir, 'out', 'results.csv'))

    def tearDown(self):
        """Clean up."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_append_and_read(self):
        """Records read back in order with one header line."""
        self.store.append(_record(seed=1, err=0.25))
        self.store.append(_record(seed=2))
        records = self.store.read()
        self.assertEqual([r.seed for r in records], [1, 2])
        self.assertEqual(records[0].estimation_error, 0.25)
        self.assertIsNone(records[1].estimation_error)
        with open(self.store.path) as f:
            self.assertEqual(sum(1 for line in f if line.startswith('method,')), 1)

    def test_reorder(self):
        """Rows are rewritten in the given key order, unknown keys last."""
        for seed in (3, 1, 2):
            self.store.append(_record(seed=seed))
        self.store.append(_record(method='glc', seed=9))
        self.store.reorder([cell_key('ce', 'symmetric', 0.2, s) for s in (1, 2, 3)])
        self.assertEqual([(r.method, r.seed) for r in self.store.read()],
                         [('ce', 1), ('ce', 2), ('ce', 3), ('glc', 9)])
        self.assertFalse(os.path.exists(self.store.path + '.tmp'))

    def test_completed_keys(self):
        """Keys match cells regardless of float formatting."""
        self.store.append(_record(rate=0.4))
        self.assertIn(cell_key('ce', 'symmetric', 0.4, 1), self.store.completed_keys())

    def test_missing_file_is_empty(self):
        """A results file that doesn't exist yet has no records."""
        self.assertEqual(self.store.read(), [])

    def test_bad_header(self):
        """Foreign CSVs are rejected."""
        os.makedirs(os.path.dirname(self.store.path))
        with open(self.store.path, 'w') as f:
            f.write("a,b,c\n1,2,3\n")
        with self.assertRaises(DatasetParseError):
            self.store.read()

    def test_record_validation(self):
        """Unknown methods and out-of-range accuracies are rejected."""
        with self.assertRaises(InvalidInputError):
            _record(method='coteaching')
        with self.assertRaises(InvalidInputError):
            _record(acc=1.5)

    def test_summary(self):
        """Mean and std per method and rate."""
        records = [_record(seed=1, acc=0.5, err=0.1), _record(seed=2, acc=0.7, err=0.3),
                   _record(method='meta', seed=1, acc=0.9, err=0.05)]
        summary = summarize_records(records)
        ce = summary[summary['method'] == 'ce'].iloc[0]
        self.assertEqual(ce['runs'], 2)
        self.assertAlmostEqual(ce['test_accuracy_mean'], 0.6)
        self.assertAlmostEqual(ce['estimation_error_mean'], 0.2)
        meta = summary[summary['method'] == 'meta'].iloc[0]
        self.assertTrue(pd.isna(meta['test_accuracy_std']))
        self.assertEqual(len(summarize_records([])), 0)


class TestSweepManifest(unittest.TestCase):
    """Manifest parsing."""

    def test_cells(self):
        """Methods x rates x seeds."""
        manifest = SweepManifest.from_dict({
            'methods': ['ce', 'meta'],
            'noise': [{'kind': 'symmetric', 'rates': [0.2, 0.4]},
                      {'kind': 'pairs', 'rates': [0.2], 'pairs': 'cyclic'}],
            'seeds': [1, 2],
        }, num_classes=3)
        cells = manifest.cells()
        self.assertEqual(len(cells), 12)
        self.assertEqual(cells[-1].noise.pairs, ((0, 1), (1, 2), (2, 0)))

    def test_defaults(self):
        """Noise defaults to symmetric over the standard rate axis and seeds to [0]."""
        manifest = SweepManifest.from_dict({'methods': ['ce']}, num_classes=3)
        self.assertEqual(len(manifest.cells()), 5)
        self.assertEqual(manifest.seeds, [0])

    def test_invalid(self):
        """Unknown methods, noise kinds and rates are rejected."""
        for raw in ({'methods': []}, {'methods': ['mentornet']},
                    {'methods': ['ce'], 'noise': [{'kind': 'uniform'}]},
                    {'methods': ['ce'], 'noise': [{'kind': 'symmetric', 'rates': [1.5]}]},
                    ['ce']):
            with self.assertRaises(InvalidConfigError, msg=str(raw)):
                SweepManifest.from_dict(raw, num_classes=3)


class TestSweepStateManager(unittest.TestCase):
    """YAML state persistence."""

    def setUp(self):
        """Temporary state path."""
        self.temp_dir = tempfile.mkdtemp()
        self.path = os.path.join(self.temp_dir, 'state.yml')

    def tearDown(self):
        """Clean up."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_round_trip(self):
        """Statuses survive a save and reload."""
        key = cell_key('glc', 'symmetric', 0.2, 1)
        manager = SweepStateManager(self.path)
        manager.mark_running(key)
        manager.mark_failed(key, "boom")
        manager.save_state()
        reloaded = SweepStateManager(self.path)
        self.assertEqual(reloaded.get_status(key), CellStatus.FAILED)
        self.assertEqual(reloaded.failed_cells(), ['glc/symmetric/0.2/1'])
        reloaded.mark_completed(key)
        self.assertEqual(reloaded.failed_cells(), [])
        self.assertEqual(reloaded.get_status(cell_key('ce', 'symmetric', 0.2, 1)),
                         CellStatus.PENDING)

    def test_timestamps_follow_record_times(self):
        """Wall-clock stamps appear only when times are recorded."""
        key = cell_key('meta', 'pairs', 0.4, 3)
        for record_times in (True, False):
            path = os.path.join(self.temp_dir, f'state_{record_times}.yml')
            manager = SweepStateManager(path, record_times=record_times)
            manager.mark_running(key)
            manager.mark_completed(key)
            manager.save_state()
            with open(path) as f:
                state = yaml.safe_load(f)
            cell = state['cells']['meta/pairs/0.4/3']
            self.assertEqual('updated_at' in state, record_times)
            self.assertEqual(cell['completed_at'] is not None, record_times)

    def test_failed_cells_sorted(self):
        """Failed cells are listed by name whatever order they failed in."""
        manager = SweepStateManager(self.path, record_times=False)
        for seed in (3, 1, 2):
            manager.mark_failed(cell_key('ce', 'symmetric', 0.2, seed), "boom")
        self.assertEqual(manager.failed_cells(),
                         ['ce/symmetric/0.2/1', 'ce/symmetric/0.2/2', 'ce/symmetric/0.2/3'])


class TestSweepProcessor(unittest.TestCase):
    """End-to-end sweeps on the tiny configuration."""

    def setUp(self):
        """Tiny config and a 2 x 2 x 2 manifest."""
        self.temp_dir = tempfile.mkdtemp()
        self.config_path = write_config(self.temp_dir)
        self.results = os.path.join(self.temp_dir, 'results.csv')
        self.manifest = SweepManifest.from_dict({
            'methods': ['ce', 'glc'],
            'noise': [{'kind': 'symmetric', 'rates': [0.2, 0.4]}],
            'seeds': [1, 2],
        }, num_classes=3)

    def tearDown(self):
        """Clean up."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _processor(self, workers=1, results=None):
        manager = ConfigManager(self.config_path)
        manager.config['sweep']['workers'] = workers
        return SweepProcessor(manager, results or self.results)

    def test_runs_every_cell_then_resumes(self):
        """Eight rows on the first run; a rerun skips them all."""
        report = self._processor().run(self.manifest)
        self.assertEqual(report['summary']['successful'], 8)
        self.assertEqual(report['summary']['failed'], 0)
        self.assertEqual(len(ResultsStore(self.results).read()), 8)

        again = self._processor().run(self.manifest)
        self.assertEqual(again['summary']['skipped'], 8)
        self.assertEqual(again['summary']['successful'], 0)
        self.assertEqual(len(ResultsStore(self.results).read()), 8)

        state_path = os.path.join(self.temp_dir, 'results_state.yml')
        with open(state_path) as f:
            state = yaml.safe_load(f)
        self.assertEqual(len(state['cells']), 8)

    def test_parallel_matches_serial(self):
        """Serial and parallel sweeps write byte-identical results and state files."""
        outputs = []
        for workers, name in ((1, 'serial'), (3, 'parallel_a'), (3, 'parallel_b')):
            results = os.path.join(self.temp_dir, name, 'results.csv')
            self._processor(workers=workers, results=results).run(self.manifest)
            state = os.path.join(self.temp_dir, name, 'results_state.yml')
            outputs.append((read_bytes(results), read_bytes(state)))
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[1], outputs[2])
        parallel = ResultsStore(os.path.join(self.temp_dir, 'parallel_a', 'results.csv'))
        keys = [r.key for r in parallel.read()]
        self.assertEqual(keys, [cell.key for cell in self.manifest.cells()])
        self.assertNotIn(b'updated_at', outputs[0][1])


class TestSweepCommand(unittest.TestCase):
    """The sweep subcommand."""

    def setUp(self):
        """Tiny config."""
        self.temp_dir = tempfile.mkdtemp()
        self.config_path = write_config(self.temp_dir)

    def tearDown(self):
        """Clean up."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _manifest(self, name, body):
        path = os.path.join(self.temp_dir, name)
        with open(path, 'w') as f:
            yaml.safe_dump(body, f)
        return path

    def test_sweep_with_summary(self):
        """Results and a summary CSV with one row per method and rate."""
        manifest = self._manifest('m.yml', {
            'methods': ['ce', 'glc'],
            'noise': [{'kind': 'symmetric', 'rates': [0.2, 0.4]}],
            'seeds': [1, 2],
            'config': {'meta': {'iterations': 3}},
        })
        results = os.path.join(self.temp_dir, 'r.csv')
        summary = os.path.join(self.temp_dir, 's.csv')
        code, _ = run_cli('--config', self.config_path, 'sweep', '--manifest', manifest,
                          '--results', results, '--summary', summary)
        self.assertEqual(code, 0)
        frame = pd.read_csv(summary)
        self.assertEqual(len(frame), 4)
        self.assertTrue((frame['runs'] == 2).all())

    def test_failed_cell_exit_code(self):
        """A cell that cannot run makes the sweep exit with 2."""
        data = os.path.join(self.temp_dir, 'nometa.csv')
        code, _ = run_cli('--config', self.config_path, 'generate', '--n-meta', 0, '--out', data)
        self.assertEqual(code, 0)
        manifest = self._manifest('bad.yml', {
            'methods': ['glc'],
            'noise': [{'kind': 'symmetric', 'rates': [0.2]}],
            'seeds': [1],
            'dataset': data,
        })
        code, _ = run_cli('--config', self.config_path, 'sweep', '--manifest', manifest,
                          '--results', os.path.join(self.temp_dir, 'bad.csv'))
        self.assertEqual(code, 2)

    def test_invalid_manifest(self):
        """An invalid manifest is a usage error."""
        manifest = self._manifest('invalid.yml', {'methods': ['mentornet']})
        code, _ = run_cli('--config', self.config_path, 'sweep', '--manifest', manifest,
                          '--results', os.path.join(self.temp_dir, 'x.csv'))
        self.assertEqual(code, 1)


if __name__ == '__main__':
    unittest.main()
