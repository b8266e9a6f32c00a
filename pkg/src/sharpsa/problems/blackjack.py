"""Infinite-deck Blackjack as a 290-state, 2-action MDP.

States: hard totals 4-22 without a usable ace (22 marks a bust hand) and
soft totals 12-21 with a usable ace, each paired with the dealer's showing
card 1-10.  Action 0 sticks, action 1 hits.  Sticking plays out the dealer
(hits below 17, stands on soft 17) and ends the episode; hitting a hand past
21 moves to the bust state, whose actions both pay -1 and end the episode.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .mdp import MdpModel

CARD_PROBS = np.array([1, 1, 1, 1, 1, 1, 1, 1, 1, 4], dtype=float) / 13.0  # ranks 1..10
STICK, HIT = 0, 1
BUST = 22


def state_list():
    """Ordered (total, usable_ace, dealer_card) triples, 290 of them."""
    states = []
    for usable, totals in ((False, range(4, 23)), (True, range(12, 22))):
        for total in totals:
            for dealer in range(1, 11):
                states.append((total, usable, dealer))
    return states


@lru_cache(maxsize=None)
def dealer_outcomes(card: int) -> dict:
    """Distribution of the dealer's final total (17-21 or 'bust') from one card."""

    @lru_cache(maxsize=None)
    def play(total, soft):
        value = total + 10 if soft and total + 10 <= 21 else total
        if value >= 17:
            return {value: 1.0}
        out = {}
        for rank, p in enumerate(CARD_PROBS, start=1):
            nt = total + rank
            ns = soft or rank == 1
            if nt > 21:
                out["bust"] = out.get("bust", 0.0) + p
                continue
            for k, q in play(nt, ns).items():
                out[k] = out.get(k, 0.0) + p * q
        return out

    # totals count aces as 1; 'soft' means an ace could count 11
    return play(card, card == 1)


def stick_reward(player: int, dealer_card: int) -> float:
    if player > 21:
        return -1.0
    r = 0.0
    for final, p in dealer_outcomes(dealer_card).items():
        if final == "bust" or player > final:
            r += p
        elif player < final:
            r -= p
    return r


def hit_successor(total: int, usable: bool, rank: int):
    """Player hand after drawing ``rank``; returns (total, usable) or BUST."""
    if usable:
        nt = total + rank
        if nt > 21:
            nt -= 10
            usable = False
        return nt, usable
    if rank == 1 and total + 11 <= 21:
        return total + 11, True
    nt = total + rank
    return (BUST, False) if nt > 21 else (nt, False)


def make_blackjack(cost_sd: float = 1.0) -> MdpModel:
    states = state_list()
    index = {s: i for i, s in enumerate(states)}
    S, A = len(states), 2
    terminal = S  # single absorbing exit column
    P = np.zeros((S, A, S + 1))
    reward = np.zeros((S, A))
    for i, (total, usable, dealer) in enumerate(states):
        if total == BUST:
            reward[i, :] = -1.0
            P[i, :, terminal] = 1.0
            continue
        reward[i, STICK] = stick_reward(total, dealer)
        P[i, STICK, terminal] = 1.0
        for rank, p in enumerate(CARD_PROBS, start=1):
            nt, nu = hit_successor(total, usable, rank)
            P[i, HIT, index[(nt, nu, dealer)]] += p
    return MdpModel(
        P=P,
        c_bar=-reward,
        beta=1.0,
        xi=np.full(S, 1.0 / S),
        pi=np.full((S, A), 1.0 / (S * A)),
        cost_sd=cost_sd,
        n_terminal=1,
        labels=states,
    )
