"""Tests for the meta-transition command line."""

import os
import shutil
import sys
import tempfile
import unittest

import numpy as np
import yaml

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from meta_transition.data.dataset_io import (
    load_checkpoint, metadata_path, read_dataset_csv, read_metadata, read_transition_csv,
)
from meta_transition.noise import check_row_stochastic
from meta_transition.pipeline import ResultsStore
from tests.cli_helpers import REFERENCE_OVERRIDES, read_bytes, run_cli, write_config


class CliTestCase(unittest.TestCase):
    """Temporary workspace with a tiny configuration."""

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.config = write_config(self.temp_dir)

    def tearDown(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def path(self, *parts):
        return os.path.join(self.temp_dir, *parts)

    def cli(self, *argv):
        return run_cli('--config', self.config, *argv)

    def generate(self, name='clean.csv', seed=1, *extra):
        code, _ = self.cli('generate', '--seed', seed, '--out', self.path(name), *extra)
        self.assertEqual(code, 0)
        return self.path(name)

    def corrupt(self, source, name='noisy.csv', kind='symmetric', rate=0.4, seed=2, *extra):
        code, out = self.cli('corrupt', '--data', source, '--kind', kind, '--rate', rate,
                             '--seed', seed, '--out', self.path(name), *extra)
        self.assertEqual(code, 0)
        return self.path(name), yaml.safe_load(out)


class TestGenerateAndCorrupt(CliTestCase):
    """Dataset commands."""

    def test_generate_split_counts(self):
        """Rows left after meta and test go to training."""
        dataset = read_dataset_csv(self.generate())
        self.assertEqual((dataset.count('train'), dataset.count('meta'), dataset.count('test')),
                         (75, 15, 30))
        metadata = read_metadata(metadata_path(self.path('clean.csv')))
        self.assertEqual(metadata['num_classes'], 3)
        self.assertEqual(metadata['seed'], 1)

    def test_generate_flags_override_config(self):
        """--classes and --per-class rebuild the mixture."""
        path = self.generate('four.csv', 1, '--classes', 4, '--per-class', 30, '--n-test', 20)
        dataset = read_dataset_csv(path)
        self.assertEqual(dataset.num_classes, 4)
        self.assertEqual(dataset.size, 120)
        self.assertEqual(dataset.count('test'), 20)

    def test_generate_deterministic(self):
        """The same seed writes byte-identical files."""
        a = self.generate('a.csv', 5)
        b = self.generate('b.csv', 5)
        self.assertEqual(read_bytes(a), read_bytes(b))
        self.assertEqual(read_bytes(metadata_path(a)), read_bytes(metadata_path(b)))

    def test_corrupt_rate_zero(self):
        """Rate 0 keeps every noisy label equal to the clean one."""
        noisy_path, report = self.corrupt(self.generate(), rate=0.0)
        dataset = read_dataset_csv(noisy_path)
        np.testing.assert_array_equal(dataset.noisy_labels, dataset.clean_labels)
        self.assertEqual(report['max_entry_error'], 0.0)

    def test_corrupt_pairs(self):
        """A full 0:1 flip sends every class-0 training label to class 1."""
        noisy_path, report = self.corrupt(self.generate(), 'noisy.csv', 'pairs', 1.0, 2,
                                          '--pairs', '0:1')
        dataset = read_dataset_csv(noisy_path)
        train = dataset.indices('train')
        zeros = train[dataset.clean_labels[train] == 0]
        self.assertTrue(np.all(dataset.noisy_labels[zeros] == 1))
        others = train[dataset.clean_labels[train] != 0]
        np.testing.assert_array_equal(dataset.noisy_labels[others], dataset.clean_labels[others])
        self.assertEqual(report['noise']['pairs'], [[0, 1]])

    def test_corrupt_metadata(self):
        """The sidecar carries the noise, its seed and the ground-truth matrix."""
        noisy_path, _ = self.corrupt(self.generate())
        metadata = read_metadata(metadata_path(noisy_path))
        self.assertEqual(metadata['noise']['kind'], 'symmetric')
        self.assertEqual(metadata['noise_seed'], 2)
        check_row_stochastic(np.array(metadata['transition_matrix']))

    def test_corrupt_deterministic(self):
        """Repeated corruption with one seed is byte-identical."""
        clean = self.generate()
        a, _ = self.corrupt(clean, 'a.csv')
        b, _ = self.corrupt(clean, 'b.csv')
        self.assertEqual(read_bytes(a), read_bytes(b))


class TestTrainAndEval(CliTestCase):
    """Training, artifacts and evaluation."""

    def setUp(self):
        """Generate and corrupt one dataset."""
        super().setUp()
        self.data, _ = self.corrupt(self.generate())

    def train(self, method, out_dir, *extra):
        code, out = self.cli('train', '--method', method, '--data', self.data, '--seed', 3,
                             '--out-dir', out_dir, *extra)
        self.assertEqual(code, 0)
        return yaml.safe_load(out)

    def test_meta_artifacts(self):
        """The meta method writes checkpoint, transition, trace, metadata and a result row."""
        out_dir = self.path('meta_run')
        payload = self.train('meta', out_dir)
        for name in ('checkpoint.txt', 'transition.csv', 'trace.csv', 'run.meta.yml'):
            self.assertTrue(os.path.exists(os.path.join(out_dir, name)), name)
        check_row_stochastic(read_transition_csv(os.path.join(out_dir, 'transition.csv')))
        records = ResultsStore(os.path.join(out_dir, 'results.csv')).read()
        self.assertEqual(len(records), 1)
        self.assertEqual(records[0].method, 'meta')
        self.assertIsNotNone(records[0].estimation_error)
        self.assertIsNone(records[0].wall_time_seconds)
        self.assertEqual(payload['record']['method'], 'meta')

    def test_train_deterministic(self):
        """Two runs with the same seed produce identical artifacts."""
        for method in ('meta', 'glc'):
            a, b = self.path(f'{method}_a'), self.path(f'{method}_b')
            self.train(method, a)
            self.train(method, b)
            for name in ('checkpoint.txt', 'transition.csv', 'results.csv'):
                self.assertEqual(read_bytes(os.path.join(a, name)),
                                 read_bytes(os.path.join(b, name)), f"{method}/{name}")

    def test_every_method_runs(self):
        """All six methods append to one shared results file."""
        results = self.path('all.csv')
        for method in ('ce', 'finetune', 'forward', 'glc', 'smodel', 'meta'):
            self.train(method, self.path(method), '--results', results)
        records = ResultsStore(results).read()
        self.assertEqual([r.method for r in records],
                         ['ce', 'finetune', 'forward', 'glc', 'smodel', 'meta'])
        for record in records:
            self.assertTrue(0.0 <= record.test_accuracy <= 1.0)
            self.assertGreater(record.bound_value, 0.0)
        self.assertIsNone(records[0].estimation_error)

    def test_eval(self):
        """eval reports accuracy, estimation error and the bound."""
        out_dir = self.path('run')
        self.train('glc', out_dir)
        code, out = self.cli('eval', '--checkpoint', os.path.join(out_dir, 'checkpoint.txt'),
                             '--data', self.data,
                             '--estimate', os.path.join(out_dir, 'transition.csv'))
        self.assertEqual(code, 0)
        payload = yaml.safe_load(out)
        self.assertTrue(0.0 <= payload['test_accuracy'] <= 1.0)
        self.assertGreaterEqual(payload['estimation_error'], 0.0)
        self.assertGreater(payload['bound_value'], 0.0)
        records = ResultsStore(os.path.join(out_dir, 'results.csv')).read()
        self.assertAlmostEqual(payload['test_accuracy'], records[0].test_accuracy, places=12)
        self.assertEqual(load_checkpoint(os.path.join(out_dir, 'checkpoint.txt')).layer_dims,
                         (2, 6, 3))

    def test_overrides(self):
        """Flag overrides land in the run metadata."""
        out_dir = self.path('override')
        self.train('meta', out_dir, '--iterations', 4, '--alpha', 0.05, '--mode', 'fd-trick',
                   '--init', 'uniform')
        with open(os.path.join(out_dir, 'run.meta.yml')) as f:
            metadata = yaml.safe_load(f)
        config = metadata['train_config']
        self.assertEqual((config['iterations'], config['alpha'], config['hypergrad_mode'],
                          config['init_source']), (4, 0.05, 'fd-trick', 'uniform'))


class TestExitCodes(CliTestCase):
    """Error reporting through exit codes."""

    def test_usage_errors(self):
        """Bad flags exit with 1."""
        self.assertEqual(self.cli('generate', '--per-class', 0, '--out', self.path('x.csv'))[0], 1)
        self.assertEqual(self.cli('train', '--method', 'mentornet', '--data', 'x.csv')[0], 1)
        self.assertEqual(self.cli('corrupt', '--data', 'x.csv', '--kind', 'symmetric',
                                  '--rate', 1.5, '--out', 'y.csv')[0], 1)
        self.assertEqual(run_cli()[0], 1)

    def test_invalid_pairs(self):
        """Malformed pairs are a configuration error."""
        clean = self.generate()
        code, _ = self.cli('corrupt', '--data', clean, '--kind', 'pairs', '--rate', 0.2,
                           '--pairs', '0-1', '--out', self.path('n.csv'))
        self.assertEqual(code, 1)

    def test_missing_file(self):
        """A missing input file exits with 3."""
        code, _ = self.cli('train', '--method', 'ce', '--data', self.path('missing.csv'))
        self.assertEqual(code, 3)
        self.assertEqual(run_cli('--config', self.path('nope.yml'), 'generate',
                                 '--out', self.path('x.csv'))[0], 3)

    def test_parse_error(self):
        """A malformed dataset exits with 1."""
        bad = self.path('bad.csv')
        with open(bad, 'w') as f:
            f.write("f0,f1,clean_label,split\n0.1,zz,0,train\n")
        self.assertEqual(self.cli('train', '--method', 'ce', '--data', bad)[0], 1)

    def test_missing_meta_split(self):
        """Methods needing meta data fail cleanly without it."""
        clean = self.generate('nometa.csv', 1, '--n-meta', 0)
        noisy, _ = self.corrupt(clean, 'nometa_noisy.csv')
        code, _ = self.cli('train', '--method', 'meta', '--data', noisy,
                           '--out-dir', self.path('nometa_run'))
        self.assertEqual(code, 1)

    def test_divergence(self):
        """A diverging run exits with 2."""
        strict_dir = self.path('strict')
        os.makedirs(strict_dir)
        config = write_config(strict_dir, {'meta': {'divergence_threshold': 0.01}})
        clean = self.generate()
        noisy, _ = self.corrupt(clean)
        code, _ = run_cli('--config', config, 'train', '--method', 'meta', '--data', noisy,
                          '--init', 'uniform', '--out-dir', self.path('diverged'))
        self.assertEqual(code, 2)


class TestReferenceTaskCli(CliTestCase):
    """The train command on the reference task with the shipped settings."""

    def setUp(self):
        """Reference-sized configuration with symmetric eta = 0.4 labels."""
        super().setUp()
        self.config = write_config(self.temp_dir, REFERENCE_OVERRIDES)
        self.data, _ = self.corrupt(self.generate(seed=1), rate=0.4, seed=1)

    def test_meta_improves_on_its_glc_start(self):
        """meta --init glc ends with a lower estimation error than the glc row of the same seed."""
        results = self.path('results.csv')
        for method, extra in (('glc', ()), ('meta', ('--init', 'glc'))):
            code, _ = self.cli('train', '--method', method, '--data', self.data, '--seed', 1,
                               '--out-dir', self.path(method), '--results', results, *extra)
            self.assertEqual(code, 0)
        glc, meta = ResultsStore(results).read()
        self.assertEqual((glc.method, meta.method), ('glc', 'meta'))
        self.assertEqual((glc.seed, meta.seed), (1, 1))
        self.assertLess(meta.estimation_error, glc.estimation_error)


if __name__ == '__main__':
    unittest.main()
