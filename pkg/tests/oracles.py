"""Independent reference implementations the library is checked against.

Everything here is written as plain per-index loops or direct formula
transcriptions, deliberately ignoring the vectorized shortcuts the library
uses. Slow and obvious beats fast and shared-bug.
"""

import numpy as np


def oracle_one_hot(labels: np.ndarray, s: int) -> np.ndarray:
    h, w = labels.shape
    out = np.zeros((s, h, w), dtype=np.float32)
    for y in range(h):
        for x in range(w):
            out[labels[y, x], y, x] = 1.0
    return out


def oracle_extract_palette(image: np.ndarray, labels: np.ndarray, s: int):
    """Per-label pixel accumulation; returns (colors float64 (s,3), present bool (s,))."""
    sums = np.zeros((s, 3), dtype=np.float64)
    counts = np.zeros(s, dtype=np.int64)
    h, w = labels.shape
    for y in range(h):
        for x in range(w):
            l = int(labels[y, x])
            counts[l] += 1
            for c in range(3):
                sums[l, c] += float(image[c, y, x])
    colors = np.zeros((s, 3), dtype=np.float64)
    for l in range(s):
        if counts[l]:
            colors[l] = sums[l] / counts[l]
    return colors, counts > 0


def oracle_semantic_sampling(colors: np.ndarray, labels: np.ndarray) -> np.ndarray:
    s = colors.shape[0]
    h, w = labels.shape
    out = np.zeros((3 * s, h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            l = int(labels[y, x])
            for c in range(3):
                out[3 * l + c, y, x] = colors[l, c]
    return out


def oracle_render(colors: np.ndarray, labels: np.ndarray) -> np.ndarray:
    h, w = labels.shape
    out = np.zeros((3, h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            for c in range(3):
                out[c, y, x] = colors[int(labels[y, x]), c]
    return out


def oracle_value_saturation(unit_image: np.ndarray):
    """HSV value and saturation grids of a (3, H, W) image in [0, 1]."""
    r, g, b = unit_image[0], unit_image[1], unit_image[2]
    value = np.maximum(np.maximum(r, g), b)
    low = np.minimum(np.minimum(r, g), b)
    with np.errstate(invalid="ignore", divide="ignore"):
        sat = np.where(value > 0, (value - low) / value, 0.0)
    return value, sat


def oracle_hue_rotate(unit_image: np.ndarray, delta: float) -> np.ndarray:
    """RGB -> HSV -> hue + delta (mod 1) -> RGB, all at float64, per pixel."""
    _, h, w = unit_image.shape
    out = np.zeros_like(unit_image, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            r, g, b = (float(unit_image[c, y, x]) for c in range(3))
            mx, mn = max(r, g, b), min(r, g, b)
            chroma = mx - mn
            if chroma == 0.0:
                hue = 0.0
            elif mx == r:
                hue = ((g - b) / chroma) % 6.0
            elif mx == g:
                hue = (b - r) / chroma + 2.0
            else:
                hue = (r - g) / chroma + 4.0
            hue = (hue / 6.0 + delta) % 1.0
            sat = 0.0 if mx == 0.0 else chroma / mx
            # standard HSV -> RGB
            hp = hue * 6.0
            c_ = mx * sat
            x_ = c_ * (1.0 - abs(hp % 2.0 - 1.0))
            m = mx - c_
            sector = int(hp) % 6
            rgb = [(c_, x_, 0), (x_, c_, 0), (0, c_, x_),
                   (0, x_, c_), (x_, 0, c_), (c_, 0, x_)][sector]
            for c in range(3):
                out[c, y, x] = rgb[c] + m
    return out


def oracle_conv3x3(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Zero-padded 3x3 convolution, (cin, H, W) -> (cout, H, W), explicit loops."""
    cout, cin, _, _ = weight.shape
    h, w = x.shape[1:]
    padded = np.zeros((cin, h + 2, w + 2), dtype=np.float64)
    padded[:, 1:-1, 1:-1] = x
    out = np.zeros((cout, h, w), dtype=np.float64)
    for o in range(cout):
        for y in range(h):
            for xx in range(w):
                acc = float(bias[o])
                for i in range(cin):
                    for ky in range(3):
                        for kx in range(3):
                            acc += weight[o, i, ky, kx] * padded[i, y + ky, xx + kx]
                out[o, y, xx] = acc
    return out


def oracle_pnorm_forward(x: np.ndarray, colors: np.ndarray, labels: np.ndarray,
                         layer, noise: np.ndarray | None = None) -> np.ndarray:
    """Reference palette-normalization forward at float64.

    Mirrors the documented math with the layer's weights: noise injection,
    one-pass batch statistics with the epsilon floor, style-map convolutions,
    then the scale/shift modulation.
    """
    n, c, h, w = x.shape
    x = x.astype(np.float64).copy()
    if noise is not None:
        scale = layer.noise_scale.detach().numpy().astype(np.float64)
        for i in range(n):
            for ch in range(c):
                x[i, ch] += scale[ch] * noise[i, 0].astype(np.float64)

    normalized = np.zeros_like(x)
    for ch in range(c):
        values = x[:, ch, :, :]
        mu = values.mean()
        var = (values * values).mean() - mu * mu
        sigma = max(np.sqrt(max(var, 0.0)), layer.eps)
        normalized[:, ch] = (values - mu) / sigma

    shared_w = layer.shared[0].weight.detach().numpy().astype(np.float64)
    shared_b = layer.shared[0].bias.detach().numpy().astype(np.float64)
    gamma_w = layer.gamma_conv.weight.detach().numpy().astype(np.float64)
    gamma_b = layer.gamma_conv.bias.detach().numpy().astype(np.float64)
    beta_w = layer.beta_conv.weight.detach().numpy().astype(np.float64)
    beta_b = layer.beta_conv.bias.detach().numpy().astype(np.float64)

    out = np.zeros_like(x)
    for i in range(n):
        style = oracle_semantic_sampling(colors[i], labels[i])
        hidden = np.maximum(oracle_conv3x3(style, shared_w, shared_b), 0.0)
        gamma = oracle_conv3x3(hidden, gamma_w, gamma_b)
        beta = oracle_conv3x3(hidden, beta_w, beta_b)
        out[i] = gamma * normalized[i] + beta
    return out


def oracle_hinge_d(real_logits: list, fake_logits: list) -> float:
    total = 0.0
    for real, fake in zip(real_logits, fake_logits):
        total += np.maximum(1.0 - np.asarray(real, dtype=np.float64), 0.0).mean()
        total += np.maximum(1.0 + np.asarray(fake, dtype=np.float64), 0.0).mean()
    return float(total)


def oracle_hinge_g(fake_logits: list) -> float:
    return float(sum(-np.asarray(fake, dtype=np.float64).mean() for fake in fake_logits))


def oracle_l1_layer_mean(feats_a: list, feats_b: list) -> float:
    """Mean over layers of per-element absolute difference."""
    total = 0.0
    for fa, fb in zip(feats_a, feats_b):
        total += np.abs(np.asarray(fa, dtype=np.float64) - np.asarray(fb, dtype=np.float64)).mean()
    return float(total / len(feats_a))


def oracle_total_g(percept: float, fms: list, advs: list,
                   w_percept: float, w_fm: float) -> float:
    total = w_percept * percept
    for fm, adv in zip(fms, advs):
        total += w_fm * fm + adv
    return float(total)


def oracle_gaussian_frechet(mu_a, cov_a, mu_b, cov_b) -> float:
    """Closed form for commuting covariances (diagonal case)."""
    mu_a, mu_b = np.asarray(mu_a, dtype=np.float64), np.asarray(mu_b, dtype=np.float64)
    da, db = np.diag(cov_a), np.diag(cov_b)
    return float(((mu_a - mu_b) ** 2).sum() + (da + db - 2.0 * np.sqrt(da * db)).sum())


def oracle_singular_value(weight: np.ndarray) -> float:
    """Largest singular value of a conv weight flattened to (cout, rest)."""
    mat = weight.reshape(weight.shape[0], -1)
    return float(np.linalg.svd(mat, compute_uv=False)[0])


def finite_difference_gradient(fn, tensor, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar fn with respect to one tensor."""
    import torch

    grad = np.zeros(tensor.numel(), dtype=np.float64)
    flat = tensor.reshape(-1)
    with torch.no_grad():
        for i in range(flat.numel()):
            original = float(flat[i])
            step = eps * max(1.0, abs(original))
            flat[i] = original + step
            upper = float(fn())
            flat[i] = original - step
            lower = float(fn())
            flat[i] = original
            grad[i] = (upper - lower) / (2.0 * step)
    return grad.reshape(tuple(tensor.shape))


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-6)
    return float((np.abs(analytic - numeric) / scale).max())
