import numpy as np
import pytest
from typer.testing import CliRunner

from conftest import random_image
from ieae.__main__ import app
from ieae.cipher import GrayImage
from ieae.files import read_pgm, write_pgm, write_series
from ieae.keystream import logistic_iterate
from ieae.records import KeyFile, SidecarMetadata

runner = CliRunner()


@pytest.fixture
def key_file(tmp_path):
    path = tmp_path / 'key.txt'
    KeyFile.build_example().save(path)
    return path


@pytest.fixture
def plain(tmp_path, rng):
    path = tmp_path / 'plain.pgm'
    write_pgm(path, random_image(rng, 20, 30))
    return path


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


def test_encrypt_decrypt(tmp_path, key_file, plain):
    cipher = tmp_path / 'cipher.pgm'
    result = invoke('encrypt', key_file, plain, cipher)
    assert result.exit_code == 0, result.output

    meta = SidecarMetadata.load(tmp_path / 'cipher.pgm.meta')
    assert 1 <= meta.mu3 <= 256
    assert (meta.orig_m, meta.orig_n) == (20, 30)
    assert read_pgm(cipher).shape == meta.layout.padded_shape

    recovered = tmp_path / 'recovered.pgm'
    result = invoke('decrypt', key_file, cipher, recovered)
    assert result.exit_code == 0, result.output
    assert read_pgm(recovered) == read_pgm(plain)


def test_decrypt_with_wrong_mu3(tmp_path, key_file, plain):
    cipher = tmp_path / 'cipher.pgm'
    invoke('encrypt', key_file, plain, cipher)
    meta = SidecarMetadata.load(tmp_path / 'cipher.pgm.meta')
    wrong = tmp_path / 'wrong.meta'
    SidecarMetadata(
        mu3=meta.mu3 % 256 + 1, orig_m=meta.orig_m, orig_n=meta.orig_n,
        r_rounds=meta.r_rounds, p1=meta.p1, p2=meta.p2,
    ).save(wrong)

    recovered = tmp_path / 'recovered.pgm'
    result = invoke('decrypt', key_file, cipher, recovered, '--meta', wrong)
    assert result.exit_code == 0, result.output
    assert read_pgm(recovered) != read_pgm(plain)


def test_decrypt_without_meta(tmp_path, key_file, plain):
    cipher = tmp_path / 'cipher.pgm'
    invoke('encrypt', key_file, plain, cipher)
    (tmp_path / 'cipher.pgm.meta').unlink()
    result = invoke('decrypt', key_file, cipher, tmp_path / 'out.pgm')
    assert result.exit_code == 1
    assert 'mu3' in result.output


def test_encrypt_rejects_non_pgm(tmp_path, key_file):
    bogus = tmp_path / 'image.png'
    bogus.write_bytes(b'\x89PNG\r\n')
    result = invoke('encrypt', key_file, bogus, tmp_path / 'out.pgm')
    assert result.exit_code == 2


def test_truncated_cipher(tmp_path, key_file, plain):
    cipher = tmp_path / 'cipher.pgm'
    invoke('encrypt', key_file, plain, cipher)
    cipher.write_bytes(cipher.read_bytes()[:-10])
    result = invoke('decrypt', key_file, cipher, tmp_path / 'out.pgm')
    assert result.exit_code == 2


def test_bad_key_file(tmp_path, plain):
    key_file = tmp_path / 'key.txt'
    key_file.write_text('omega1=50\nomega2=50\nmu1\n')
    result = invoke('encrypt', key_file, plain, tmp_path / 'out.pgm')
    assert result.exit_code == 2
    assert ':3:' in result.output


def test_key_out_of_domain(tmp_path, plain):
    key_file = tmp_path / 'key.txt'
    key_file.write_text(KeyFile.build_example().encode().replace('mu=3.999', 'mu=3.5'))
    result = invoke('encrypt', key_file, plain, tmp_path / 'out.pgm')
    assert result.exit_code == 1


def test_extract_mask_and_mask_decrypt(tmp_path, key_file, plain, rng):
    cipher = tmp_path / 'cipher.pgm'
    invoke('encrypt', key_file, plain, cipher)
    meta = SidecarMetadata.load(tmp_path / 'cipher.pgm.meta')

    mask = tmp_path / 'mask.pgm'
    result = invoke('extract-mask', plain, cipher, f'{meta.p1}x{meta.p2}', meta.r_rounds, mask)
    assert result.exit_code == 0, result.output
    mask_meta = SidecarMetadata.load(tmp_path / 'mask.pgm.meta')
    assert mask_meta == meta

    # a second image with the same first-block sum
    pixels = read_pgm(plain).pixels.astype(np.int64)
    pixels[1:, 1:] = rng.integers(0, 256, size=(19, 29))
    pixels[0, 0] = (pixels[0, 0] + (meta.mu3 - 1) - pixels[:meta.p1, :meta.p2].sum()) % 256
    target = tmp_path / 'target.pgm'
    write_pgm(target, GrayImage(pixels))
    target_cipher = tmp_path / 'target-cipher.pgm'
    invoke('encrypt', key_file, target, target_cipher)

    recovered = tmp_path / 'recovered.pgm'
    result = invoke(
        'mask-decrypt', target_cipher, mask, recovered,
        '--meta', tmp_path / 'target-cipher.pgm.meta',
    )
    assert result.exit_code == 0, result.output
    assert read_pgm(recovered) == read_pgm(target)


def test_extract_mask_hand_layout(tmp_path):
    plain, cipher, mask = (tmp_path / name for name in ('p.pgm', 'c.pgm', 'm.pgm'))
    write_pgm(plain, GrayImage(np.array([[1, 2]])))
    write_pgm(cipher, GrayImage(np.array([[10, 20]])))
    result = invoke('extract-mask', plain, cipher, '1x1', 2, mask)
    assert result.exit_code == 0, result.output
    assert read_pgm(mask).pixels.tolist() == [[9, 16]]


def test_extract_mask_usage_errors(tmp_path, plain):
    result = invoke('extract-mask', plain, plain, '8by8', 1, tmp_path / 'm.pgm')
    assert result.exit_code == 2
    result = invoke('extract-mask', plain, plain, '8x8', 1, tmp_path / 'm.pgm')
    assert result.exit_code == 1


def test_attack_experiment_needs_enough_trials(key_file, plain):
    result = invoke('attack-experiment', key_file, plain, '--trials', 0)
    assert result.exit_code == 2


def test_attack_experiment(tmp_path, key_file, rng, monkeypatch):
    monkeypatch.setenv('IEAE_EXECUTOR', 'threads')
    monkeypatch.setenv('IEAE_WORKERS', '2')
    reference = tmp_path / 'reference.pgm'
    write_pgm(reference, random_image(rng, 8, 8))
    result = invoke('attack-experiment', key_file, reference, '--trials', 256, '--rng-seed', 5)
    assert result.exit_code == 0, result.output
    assert 'trials=256' in result.output


def test_graph_arnold(tmp_path):
    dot, census = tmp_path / 'g.dot', tmp_path / 'census.txt'
    result = invoke('graph', 'arnold', dot, census)
    assert result.exit_code == 0, result.output
    rows = [tuple(map(int, line.split())) for line in census.read_text().splitlines()]
    assert sum(size * count for _, size, count in rows) == 256
    assert dot.read_text().count('->') == 256
    assert '254' in result.output


def test_graph_logistic_fixed(tmp_path):
    dot, census = tmp_path / 'g.dot', tmp_path / 'census.txt'
    result = invoke('graph', 'logistic-fixed', dot, census, '--mu', '61/16', '--e', 6, '--quantizer', 'round')
    assert result.exit_code == 0, result.output
    assert dot.read_text().count('->') == 65

    result = invoke('graph', 'logistic-fixed', dot, census, '--mu', '61/15')
    assert result.exit_code == 2


def test_graph_logistic_float(tmp_path):
    dot, census = tmp_path / 'g.dot', tmp_path / 'census.txt'
    result = invoke('graph', 'logistic-float', dot, census, '--mu', '123/32')
    assert result.exit_code == 0, result.output
    assert dot.read_text().count('->') == 113


def test_pow10():
    result = invoke('pow10', '--start', 14, '--stop', 14)
    assert result.exit_code == 0
    assert '14 47 17' in result.output

    result = invoke('pow10', '--start', 1, '--stop', 51)
    assert result.exit_code == 1


def test_lyapunov(tmp_path):
    series = tmp_path / 'series.csv'
    write_series(series, [3.0] * 50)
    result = invoke('lyapunov', series)
    assert result.exit_code == 1

    write_series(series, logistic_iterate(0.1234, 4.0, 3000))
    result = invoke('lyapunov', series)
    assert result.exit_code == 0, result.output
    lam = float(result.stdout.split('lambda=')[1].split()[0])
    assert lam > 0


def test_rank_layouts(tmp_path, key_file, plain):
    cipher = tmp_path / 'cipher.pgm'
    invoke('encrypt', key_file, plain, cipher)
    result = invoke('rank-layouts', plain, cipher, 3)
    assert result.exit_code == 0, result.output
    meta = SidecarMetadata.load(tmp_path / 'cipher.pgm.meta')
    assert f'{meta.p1}x{meta.p2}' in result.output


def test_closed_form():
    result = invoke('closed-form', '--rounds', 2, '--trials', 20)
    assert result.exit_code == 0
    assert 'agree=20 disagree=0' in result.output


@pytest.mark.parametrize('args', [
    ('arnold', '--e', 0),
    ('logistic-fixed', '--e', 0),
    ('logistic-float', '--exp-bits', 10, '--mant-bits', 10),
    ('logistic-float', '--exp-bits', 0),
    ('logistic-float', '--bias', 16),
])
def test_graph_rejects_bad_parameters(tmp_path, args):
    kind, *options = args
    result = invoke('graph', kind, tmp_path / 'g.dot', tmp_path / 'census.txt', *options)
    assert result.exit_code == 2
    assert not (tmp_path / 'g.dot').exists()


@pytest.mark.parametrize('options', [('--m', 0), ('--fraction', 0), ('--epsilon', -1)])
def test_lyapunov_rejects_bad_parameters(tmp_path, options):
    series = tmp_path / 'series.csv'
    write_series(series, logistic_iterate(0.1234, 4.0, 500))
    result = invoke('lyapunov', series, *options)
    assert result.exit_code == 2
    assert 'lambda=' not in result.output
