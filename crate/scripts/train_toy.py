"""Train the shipped toy MNIST model: conv 5x5 (C maps) -> ReLU -> max-pool
-> FC 10 with bias, all weights on the 8-bit grid.

The hidden stage is trained through a cycle-accurate emulation of the SC
datapath: per cycle, every activation stream shares one comparator
threshold and every weight stream another, XNOR products are counted, and
ReLU / max-pool act on the per-cycle count exactly as the OR gates on the
B2S outputs do. The classifier sees Gaussian noise matching the
count-readout variance."""
import argparse

import numpy as np
import torch
import torch.nn.functional as F

N_BITS = 8
S = 2 ** (N_BITS - 1)


def q(x):
    xq = torch.clamp(torch.round(x * S), -S, S - 1) / S
    return x + (xq - x).detach()


def signs(v, r):
    """+-1 comparator bits of bipolar values v against thresholds r (per cycle)."""
    word = torch.round((v + 1) * S)
    return torch.where(word[..., None] > r, 1.0, -1.0)


def split(n, ev_per_class, y):
    ev, tr = [], []
    for c in range(10):
        idx = np.where(y == c)[0]
        ev += list(idx[-ev_per_class:])
        tr += list(idx[:-ev_per_class])
    return np.array(ev), np.array(tr)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", default="all.npz", help="npz with uint8 X (n,784) and Y")
    ap.add_argument("--channels", type=int, default=8)
    ap.add_argument("--pool", type=int, default=4)
    ap.add_argument("--shift", type=int, default=1)
    ap.add_argument("--cycles", type=int, default=32, help="emulated cycles per training sample")
    ap.add_argument("--k", type=int, default=128, help="bitstream length the noise is matched to")
    ap.add_argument("--epochs", type=int, default=12)
    ap.add_argument("--temp", type=float, default=10.0)
    ap.add_argument("--init", help="npz to start from")
    ap.add_argument("--out", required=True)
    a = ap.parse_args()
    torch.manual_seed(0)
    np.random.seed(0)

    d = np.load(a.data)
    x_all = d["X"].astype(np.float32) / 255
    y_all = d["Y"].astype(np.int64)
    ev, tr = split(len(y_all), 100, y_all)
    c, p = a.channels, a.pool
    side = 24 // p
    nf = c * side * side
    ng = (nf + 1 + 24) // 25

    if a.init:
        m = np.load(a.init)
        w1 = torch.nn.Parameter(torch.tensor(m["W1"]))
        w2 = torch.nn.Parameter(torch.tensor(m["W2"]))
        b2 = torch.nn.Parameter(torch.tensor(m["b2"]))
    else:
        w1 = torch.nn.Parameter(torch.randn(c, 1, 5, 5) * 0.3)
        w2 = torch.nn.Parameter(torch.randn(10, nf) * 0.1)
        b2 = torch.nn.Parameter(torch.zeros(10))

    def hidden_fixed(x):
        a0 = q(2 * x - 1).view(-1, 1, 28, 28)
        y1 = F.conv2d(a0, q(torch.clamp(w1, -1, 1))) / 25
        return F.max_pool2d(F.relu(y1), p).flatten(1), a0

    def hidden_sc(x, t):
        z, a0 = hidden_fixed(x)
        b = a0.shape[0]
        w = q(torch.clamp(w1, -1, 1)).detach()
        ra = torch.randint(0, 2 * S, (t,)).float()
        rw = torch.randint(0, 2 * S, (t,)).float()
        sa = signs(a0.detach(), ra).permute(0, 4, 1, 2, 3).reshape(b * t, 1, 28, 28)
        counts = []
        for j in range(t):
            sw = signs(w, rw[j : j + 1])[..., 0]
            counts.append(F.conv2d(sa.view(b, t, 28, 28)[:, j : j + 1], sw))
        cnt = (25 + torch.stack(counts, 1)) / 2  # b, t, c, 24, 24
        pooled = F.max_pool2d(cnt.reshape(b * t, c, 24, 24), p).reshape(b, t, -1)
        prob = torch.clamp(2 * pooled, min=25.0) / 50  # OR with the zero stream
        rb = torch.rand(b, t, 1) * 1.0
        bits = (rb < prob).float()
        v = 2 * bits.mean(1) - 1
        return z + (v - z).detach()

    def scores(x, t=0):
        z = hidden_sc(x, t) if t else hidden_fixed(x)[0]
        a1 = q(torch.clamp(z * 2 ** a.shift, -1, 1))
        s = (a1 @ q(torch.clamp(w2, -1, 1)).t() + q(torch.clamp(b2, -1, 1))) / (25 * ng)
        if t:
            s = s + np.sqrt(1.0 / (25 * ng * a.k)) * torch.randn_like(s)
        return s

    opt = torch.optim.Adam([w1, w2, b2], lr=2e-3)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, a.epochs)
    xt, yt = torch.tensor(x_all[tr]), torch.tensor(y_all[tr])
    xe, ye = torch.tensor(x_all[ev]), torch.tensor(y_all[ev])
    for ep in range(a.epochs):
        perm = torch.randperm(len(xt))
        for i in range(0, len(xt), 64):
            b = perm[i : i + 64]
            loss = F.cross_entropy(scores(xt[b], a.cycles) * a.temp * ng, yt[b])
            opt.zero_grad()
            loss.backward()
            opt.step()
        sched.step()
        with torch.no_grad():
            fixed = (scores(xe).argmax(1) == ye).float().mean().item()
            pred = torch.cat([scores(xe[i : i + 25], a.k).argmax(1) for i in range(0, len(xe), 25)])
            noisy = (pred == ye).float().mean().item()
        print(ep, round(loss.item(), 3), "fixed", fixed, "sc", noisy, flush=True)

    with torch.no_grad():
        np.savez(
            a.out,
            W1=q(torch.clamp(w1, -1, 1)).numpy(),
            W2=q(torch.clamp(w2, -1, 1)).numpy(),
            b2=q(torch.clamp(b2, -1, 1)).numpy(),
            G=float(2 ** a.shift),
            ev=ev,
            C=c,
            POOL=p,
        )


if __name__ == "__main__":
    main()
