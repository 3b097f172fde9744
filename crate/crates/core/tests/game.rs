mod support;

use rand::Rng;

use support::{
    brute_parity, machine_violation, positional_machines, positional_strategy_wins, random_arena,
    random_ltl, random_parity_game, rng,
};
use unisynt_core::game::{cycle_winner, strategy_is_winning};
use unisynt_core::relations::identity_transducer;
use unisynt_core::verify::enumerate_machines;
use unisynt_core::{ltl_game, parse, synthesize_fully_uniform, zielonka_solve, ParityGame, Player};

const PROPS: [&str; 2] = ["p", "q"];

fn strategy_for(
    game: &ParityGame,
    solution: &[Option<usize>],
    player: Player,
) -> Vec<Option<usize>> {
    (0..game.len())
        .map(|v| {
            if game.owner[v] == player {
                solution[v]
            } else {
                None
            }
        })
        .collect()
}

#[test]
fn zielonka_matches_brute_force() {
    let mut r = rng(41);
    for _ in 0..2000 {
        let game = random_parity_game(&mut r, 5, 3);
        let sol = zielonka_solve(&game);
        assert_eq!(sol.winner, brute_parity(&game), "{game:?}");
        for player in [Player::One, Player::Two] {
            let region: Vec<bool> = sol.winner.iter().map(|&w| w == player).collect();
            let strat = strategy_for(&game, &sol.strategy, player);
            assert!(
                strategy_is_winning(&game, player, &region, &strat),
                "{game:?}"
            );
            for v in (0..game.len()).filter(|&v| region[v]) {
                assert!(
                    positional_strategy_wins(&game, &strat, v, player),
                    "{game:?} from {v}"
                );
            }
        }
    }
}

#[test]
fn cycle_winner_uses_max_even_convention() {
    let game = ParityGame {
        owner: vec![Player::One, Player::Two],
        succ: vec![vec![1], vec![0]],
        priority: vec![2, 1],
    };
    assert_eq!(cycle_winner(&game, &[0, 1]), Player::One);
    assert_eq!(cycle_winner(&game, &[1]), Player::Two);
    assert_eq!(zielonka_solve(&game).winner, vec![Player::One; 2]);
}

#[test]
fn ltl_game_strategies_win_and_losses_are_real() {
    let mut r = rng(42);
    let (mut wins, mut losses) = (0, 0);
    for case in 0..300 {
        let arena = random_arena(&mut r, 4, &PROPS);
        let size = r.gen_range(1..=5);
        let f = random_ltl(&mut r, size, &PROPS);
        let result = ltl_game(&arena, &f).unwrap();
        match &result.machine {
            Some(m) => {
                assert!(result.realizable);
                assert_eq!(
                    machine_violation(&arena, m, &f, 6),
                    None,
                    "case {case}: {f}"
                );
                wins += 1;
            }
            None => {
                assert!(!result.realizable);
                for m in positional_machines(&arena) {
                    assert!(
                        machine_violation(&arena, &m, &f, 6).is_some(),
                        "case {case}: {f}"
                    );
                }
                enumerate_machines::<()>(&arena, 2, &mut |m| {
                    assert!(
                        machine_violation(&arena, m, &f, 6).is_some(),
                        "case {case}: {f}"
                    );
                    Ok(())
                })
                .unwrap();
                losses += 1;
            }
        }
    }
    assert!(wins > 30 && losses > 30, "{wins} {losses}");
}

#[test]
fn synthesis_with_identity_matches_plain_game() {
    let mut r = rng(43);
    for _ in 0..100 {
        let arena = random_arena(&mut r, 4, &PROPS);
        let size = r.gen_range(1..=4);
        let f = random_ltl(&mut r, size, &PROPS);
        let t = identity_transducer(&arena);
        let plain = ltl_game(&arena, &f).unwrap();
        let uniform = synthesize_fully_uniform(&arena, &t, &f, 1000).unwrap();
        assert_eq!(plain.realizable, uniform.realizable);
        if let Some(m) = &uniform.machine {
            assert_eq!(machine_violation(&arena, m, &f, 6), None);
        }
    }
}

#[test]
fn r_formula_is_rejected_by_the_plain_game() {
    let mut r = rng(44);
    let arena = random_arena(&mut r, 3, &PROPS);
    assert!(ltl_game(&arena, &parse("R p").unwrap()).is_err());
}
