"""Residual network with random Fourier feature layers.

A network is a list of layers. Layer 0 is the pure data branch
beta(x) = Re sum_k c_{0k} exp(i w'_{0k} . x) and has no z-branch. Every
later layer updates a scalar state

    z_{l+1} = z_l + Re sum_k b_{lk} exp(i w_{lk} z_l)
                  + Re sum_k c_{lk} exp(i w'_{lk} . x),    z_1 = 0,

and the network output is z_L + beta(x).

A residual layer may instead be an augmented-input layer: its x-branch
frequencies live in R^(d+1), its z-branch is empty, and the state is fed in
as the extra input coordinate, so the update is
Re sum_k c_k exp(i w_k . (x, z_l)). This variant is supported for evaluation,
serialization and layerwise training; the global gradient trainer rejects it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

FORMAT_NAME = "residual-fourier-net"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a serialized model file cannot be parsed or validated."""


@dataclass
class FourierLayer:
    """One layer: x-branch (freq_x, amp_x) and optional z-branch (freq_z, amp_z)."""

    freq_x: np.ndarray  # (K, d) or (K, d+1) for an augmented layer
    amp_x: np.ndarray   # complex (K,)
    freq_z: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amp_z: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        self.freq_x = np.atleast_2d(np.asarray(self.freq_x, dtype=float))
        self.amp_x = np.asarray(self.amp_x, dtype=complex)
        self.freq_z = np.asarray(self.freq_z, dtype=float)
        self.amp_z = np.asarray(self.amp_z, dtype=complex)
        if self.amp_x.shape != (self.freq_x.shape[0],):
            raise ValueError(
                f"amp_x shape {self.amp_x.shape} does not match "
                f"freq_x rows {self.freq_x.shape[0]}"
            )
        if self.amp_z.shape != self.freq_z.shape:
            raise ValueError(
                f"amp_z shape {self.amp_z.shape} does not match freq_z shape {self.freq_z.shape}"
            )

    @property
    def n_nodes(self) -> int:
        return self.freq_x.shape[0]


@dataclass
class ResidualNet:
    input_dim: int
    layers: list

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if len(self.layers) == 0:
            raise ValueError("a network needs at least the beta layer")
        beta = self.layers[0]
        if beta.freq_z.size != 0:
            raise ValueError("layer 0 must have an empty z-branch")
        if beta.freq_x.size and beta.freq_x.shape[1] != self.input_dim:
            raise ValueError(
                f"layer 0 frequency dimension {beta.freq_x.shape[1]} != input_dim {self.input_dim}"
            )
        for i, layer in enumerate(self.layers[1:], start=1):
            dim = layer.freq_x.shape[1] if layer.freq_x.size else self.input_dim
            if dim == self.input_dim + 1:
                if layer.freq_z.size != 0:
                    raise ValueError(
                        f"layer {i} mixes augmented x-frequencies with a z-branch"
                    )
            elif dim != self.input_dim:
                raise ValueError(
                    f"layer {i} frequency dimension {dim} is neither input_dim "
                    f"nor input_dim + 1"
                )

    @property
    def n_residual_layers(self) -> int:
        return len(self.layers) - 1


@dataclass(frozen=True)
class ForwardTrace:
    """States after each residual layer (z_2 .. z_L, shape (L-1, N)) and the output."""

    states: np.ndarray
    output: np.ndarray


def _is_augmented(layer: FourierLayer, input_dim: int) -> bool:
    return layer.freq_x.size > 0 and layer.freq_x.shape[1] == input_dim + 1


def _branch_value(phases: np.ndarray, amps: np.ndarray) -> np.ndarray:
    # Re(amp e^{i phase}) summed over nodes
    return np.cos(phases) @ amps.real - np.sin(phases) @ amps.imag


def layer_update(layer: FourierLayer, x: np.ndarray, z: np.ndarray, input_dim: int) -> np.ndarray:
    """Increment this layer adds to the state, for inputs x and current states z."""
    if _is_augmented(layer, input_dim):
        xz = np.hstack([x, z[:, None]])
        return _branch_value(xz @ layer.freq_x.T, layer.amp_x)
    upd = np.zeros(x.shape[0])
    if layer.freq_x.size:
        upd += _branch_value(x @ layer.freq_x.T, layer.amp_x)
    if layer.freq_z.size:
        upd += _branch_value(z[:, None] * layer.freq_z[None, :], layer.amp_z)
    return upd


def _as_points(net: ResidualNet, x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != net.input_dim:
        raise ValueError(f"expected points of dimension {net.input_dim}, got shape {pts.shape}")
    return pts


def eval_beta(net: ResidualNet, x) -> np.ndarray:
    """Layer-0 value beta(x); zero if layer 0 has no nodes."""
    pts = _as_points(net, x)
    beta = net.layers[0]
    if beta.freq_x.size == 0:
        return np.zeros(pts.shape[0])
    return _branch_value(pts @ beta.freq_x.T, beta.amp_x)


def forward(net: ResidualNet, x) -> ForwardTrace:
    """Run the state recursion from z_1 = 0; output = z_L + beta(x)."""
    pts = _as_points(net, x)
    n = pts.shape[0]
    z = np.zeros(n)
    states = np.empty((net.n_residual_layers, n))
    for i, layer in enumerate(net.layers[1:]):
        z = z + layer_update(layer, pts, z, net.input_dim)
        states[i] = z
    return ForwardTrace(states=states, output=z + eval_beta(net, pts))


def predict(net: ResidualNet, x) -> np.ndarray:
    return forward(net, x).output


def as_shallow(net: ResidualNet) -> ResidualNet:
    """Collapse a network with all-zero z-branches into one wide beta layer.

    With every amp_z = 0 the state never enters any phase, so the network is
    the plain feature sum over all layers' x-branches; concatenating them into
    layer 0 reproduces the output exactly.
    """
    for i, layer in enumerate(net.layers):
        if layer.amp_z.size and np.any(layer.amp_z != 0):
            raise ValueError(f"layer {i} has a non-zero z-branch; network is not shallow")
        if _is_augmented(layer, net.input_dim):
            raise ValueError(f"layer {i} is augmented; cannot flatten")
    freq = np.vstack([l.freq_x for l in net.layers if l.freq_x.size])
    amps = np.concatenate([l.amp_x for l in net.layers if l.freq_x.size])
    return ResidualNet(net.input_dim, [FourierLayer(freq_x=freq, amp_x=amps)])


def _layer_to_doc(layer: FourierLayer) -> dict:
    return {
        "freq_x": layer.freq_x.tolist(),
        "amp_x_re": layer.amp_x.real.tolist(),
        "amp_x_im": layer.amp_x.imag.tolist(),
        "freq_z": layer.freq_z.tolist(),
        "amp_z_re": layer.amp_z.real.tolist(),
        "amp_z_im": layer.amp_z.imag.tolist(),
    }


_LAYER_KEYS = ("freq_x", "amp_x_re", "amp_x_im", "freq_z", "amp_z_re", "amp_z_im")


def save_model(net: ResidualNet, path) -> None:
    """Write the network as a JSON document; floats round-trip bit-exactly."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "layers": [_layer_to_doc(layer) for layer in net.layers],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def _layer_from_doc(doc: dict, index: int) -> FourierLayer:
    for key in _LAYER_KEYS:
        if key not in doc:
            raise ModelFormatError(f"layer {index}: missing field '{key}'")
    try:
        freq_x = np.asarray(doc["freq_x"], dtype=float)
        amp_x = np.asarray(doc["amp_x_re"], dtype=float) + 1j * np.asarray(
            doc["amp_x_im"], dtype=float
        )
        freq_z = np.asarray(doc["freq_z"], dtype=float)
        amp_z = np.asarray(doc["amp_z_re"], dtype=float) + 1j * np.asarray(
            doc["amp_z_im"], dtype=float
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"layer {index}: non-numeric field ({exc})") from exc
    if freq_x.size == 0:
        freq_x = freq_x.reshape(0, 1)
    arrays = {"freq_x": freq_x, "amp_x": amp_x, "freq_z": freq_z, "amp_z": amp_z}
    for name, arr in arrays.items():
        if not np.all(np.isfinite(np.abs(arr))):
            raise ModelFormatError(f"layer {index}: field '{name}' has non-finite entries")
    try:
        return FourierLayer(freq_x=freq_x, amp_x=amp_x, freq_z=freq_z, amp_z=amp_z)
    except ValueError as exc:
        raise ModelFormatError(f"layer {index}: {exc}") from exc


def load_model(path) -> ResidualNet:
    """Read a network written by save_model, validating format and shapes."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a valid model file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"missing or wrong 'format' marker (expected {FORMAT_NAME!r})")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format version {doc.get('version')!r} (supported: {FORMAT_VERSION})"
        )
    if "input_dim" not in doc or "layers" not in doc:
        raise ModelFormatError("missing 'input_dim' or 'layers'")
    if not isinstance(doc["layers"], list) or len(doc["layers"]) == 0:
        raise ModelFormatError("'layers' must be a non-empty list")
    input_dim = doc["input_dim"]
    if not isinstance(input_dim, int) or input_dim < 1:
        raise ModelFormatError(f"'input_dim' must be a positive integer, got {input_dim!r}")
    layers = [_layer_from_doc(d, i) for i, d in enumerate(doc["layers"])]
    if layers[0].freq_x.size == 0:
        layers[0].freq_x = layers[0].freq_x.reshape(0, input_dim)
    try:
        return ResidualNet(input_dim=input_dim, layers=layers)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc
