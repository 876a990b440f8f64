use chrono::Utc;
use rfbroker_core::fixtures;
use rfbroker_core::sla::{
    next_state, ActionKind, Actor, Comparator, Response, SlaError, SlaManager, SlaState, SlaTerm,
    ViolationSubmission,
};

fn term(bound: f64) -> Vec<SlaTerm> {
    vec![SlaTerm {
        attribute: "availability".into(),
        comparator: Comparator::AtLeast,
        bound,
        unit: "ratio".into(),
    }]
}

/// Written out by hand, independent of `next_state`.
fn documented(
    state: SlaState,
    author: Actor,
    actor: Actor,
    action: ActionKind,
) -> Option<SlaState> {
    use ActionKind::*;
    use SlaState::*;
    let open = matches!(state, Proposed | Countered);
    match (open, actor != author, action) {
        (true, true, Accept) => Some(Accepted),
        (true, true, Reject) => Some(Rejected),
        (true, true, Counter) => Some(Countered),
        _ => None,
    }
}

#[test]
fn transition_function_matches_table() {
    let actions = [ActionKind::Accept, ActionKind::Reject, ActionKind::Counter];
    for state in SlaState::ALL {
        for author in Actor::ALL {
            for actor in Actor::ALL {
                for action in actions {
                    let got = next_state(state, author, actor, action).ok();
                    assert_eq!(
                        got,
                        documented(state, author, actor, action),
                        "{state:?} {author:?} {actor:?} {action:?}"
                    );
                }
            }
        }
    }
}

/// Drives a real draft into `state` with `author` pending (where possible).
fn drive(m: &SlaManager, state: SlaState, author: Actor) -> String {
    let catalog = fixtures::example_catalog();
    let reg = catalog.registry();
    let d = m
        .propose(&catalog, "studio", "RF3", author, term(0.99))
        .unwrap();
    let id = d.sla_id;
    match state {
        SlaState::Proposed => {}
        SlaState::Countered => {
            // two counters hand the pending offer back to `author`
            m.respond(reg, &id, author.other(), Response::Counter(term(0.98)))
                .unwrap();
            m.respond(reg, &id, author, Response::Counter(term(0.97)))
                .unwrap();
        }
        SlaState::Accepted => {
            m.respond(reg, &id, author.other(), Response::Accept)
                .unwrap();
        }
        SlaState::Rejected => {
            m.respond(reg, &id, author.other(), Response::Reject)
                .unwrap();
        }
        SlaState::Expired => {
            m.expire(&id).unwrap();
        }
    }
    id
}

#[test]
fn manager_follows_table_for_every_triple() {
    let catalog = fixtures::example_catalog();
    for state in SlaState::ALL {
        for author in Actor::ALL {
            for actor in Actor::ALL {
                for response in [
                    Response::Accept,
                    Response::Reject,
                    Response::Counter(term(0.9)),
                ] {
                    let m = SlaManager::new();
                    let id = drive(&m, state, author);
                    let before = m.get(&id).unwrap();
                    assert_eq!(before.state, state);
                    let kind = response.kind();
                    let pending = before.pending_author;
                    let expected = documented(state, pending, actor, kind);
                    match (
                        m.respond(catalog.registry(), &id, actor, response),
                        expected,
                    ) {
                        (Ok(after), Some(next)) => {
                            assert_eq!(after.state, next);
                            assert_eq!(after.history.len(), before.history.len() + 1);
                            assert_eq!(&after.history[..before.history.len()], &before.history[..]);
                        }
                        (
                            Err(SlaError::IllegalTransition { .. } | SlaError::WrongActor { .. }),
                            None,
                        ) => {
                            assert_eq!(m.get(&id).unwrap(), before);
                        }
                        (got, want) => panic!(
                            "{state:?}/{pending:?}/{actor:?}/{kind:?}: got {got:?}, want {want:?}"
                        ),
                    }
                }
            }
        }
    }
}

#[test]
fn stored_violations_fail_their_terms_on_replay() {
    let m = SlaManager::new();
    m.register_monitor("probe", "https://probe.example", "tok")
        .unwrap();
    let id = drive(&m, SlaState::Accepted, Actor::User);
    let mut accepted = 0;
    for step in 0..=40 {
        let observed = 0.95 + step as f64 * 0.002;
        let r = m.submit_violation(ViolationSubmission {
            sla_id: id.clone(),
            monitor_id: "probe".into(),
            attribute: "availability".into(),
            observed,
            bound: 0.99,
            observed_at: Utc::now(),
        });
        match r {
            Ok(_) => accepted += 1,
            Err(SlaError::NotAViolation { .. }) => assert!(observed >= 0.99),
            Err(e) => panic!("{e}"),
        }
    }
    assert_eq!(m.violations().len(), accepted);
    assert!(m.replay_violations().unwrap().is_empty());
}

#[test]
fn concurrent_responses_apply_exactly_one() {
    let catalog = std::sync::Arc::new(fixtures::example_catalog());
    let m = std::sync::Arc::new(SlaManager::new());
    let id = m
        .propose(&catalog, "u", "RF1", Actor::User, term(0.99))
        .unwrap()
        .sla_id;
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let (m, c, id) = (m.clone(), catalog.clone(), id.clone());
            std::thread::spawn(move || {
                let r = if i % 2 == 0 {
                    Response::Accept
                } else {
                    Response::Reject
                };
                m.respond(c.registry(), &id, Actor::Provider, r).is_ok()
            })
        })
        .collect();
    let wins = handles
        .into_iter()
        .map(|h| h.join().unwrap())
        .filter(|ok| *ok)
        .count();
    assert_eq!(wins, 1);
    assert_eq!(m.get(&id).unwrap().history.len(), 2);
}
