import numpy as np
import pytest

from matchgames import verify
from matchgames.core import (
    CompetitiveGame,
    MatchingGame,
    TransferGame,
)

# the worked 3x3 transfer market used across the engine/verify tests
EX_A = ((83, 85, 99), (74, 13, 15), (58, 49, 54))
EX_B = ((69, 6, 28), (88, 2, 70), (72, 18, 9))


@pytest.fixture
def example_market():
    couples = {
        (i, j): TransferGame(EX_A[i][j], EX_B[i][j]) for i in range(3) for j in range(3)
    }
    return MatchingGame(3, 3, "transfer", couples, (0, 0, 0), (0, 0, 0), 1.0)


def bimatrix_cne_gains(A, B, x, y, u_opt, v_opt, eps, res=1e-2):
    """Grid best-response gains beyond the current payoffs for both sides.

    Deviations must keep the partner at or above their outside option - eps.
    Returns (man_gain, woman_gain, current_u, current_v).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    xa, ya = x.as_array(), y.as_array()
    cur_u = float(xa @ A @ ya)
    cur_v = float(xa @ B @ ya)
    Xg = verify.simplex_grid(A.shape[0], res)
    Yg = verify.simplex_grid(A.shape[1], res)
    u_dev = Xg @ (A @ ya)
    v_dev = Xg @ (B @ ya)
    feas = v_dev >= v_opt - eps - 1e-9
    man_gain = float(u_dev[feas].max() - cur_u) if feas.any() else 0.0
    u_dev2 = (xa @ A) @ Yg.T
    v_dev2 = (xa @ B) @ Yg.T
    feas2 = u_dev2 >= u_opt - eps - 1e-9
    woman_gain = float(v_dev2[feas2].max() - cur_v) if feas2.any() else 0.0
    return man_gain, woman_gain, cur_u, cur_v


def make_competitive(A, lam, mu):
    """Couple with woman's payoff -(lam*A + mu); strictly competitive by construction."""
    A = np.asarray(A, dtype=float)
    return CompetitiveGame(A, -(lam * A + mu))
