use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum State {
    #[default]
    Idle,
    Compute,
    Done,
}

impl State {
    pub const ALL: [State; 3] = [State::Idle, State::Compute, State::Done];
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::Idle => "IDLE",
            State::Compute => "COMPUTE",
            State::Done => "DONE",
        })
    }
}

/// Control inputs sampled by the state machine. `complete` is raised by the
/// datapath when the attitude result has been written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Signals {
    pub start: bool,
    pub reset: bool,
    pub complete: bool,
}

impl Signals {
    pub const START: Signals = Signals {
        start: true,
        reset: false,
        complete: false,
    };
    pub const RESET: Signals = Signals {
        start: false,
        reset: true,
        complete: false,
    };
    pub const COMPLETE: Signals = Signals {
        start: false,
        reset: false,
        complete: true,
    };

    /// All eight combinations of the three signals.
    pub fn all() -> impl Iterator<Item = Signals> {
        (0u8..8).map(|bits| Signals {
            start: bits & 1 != 0,
            reset: bits & 2 != 0,
            complete: bits & 4 != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoreState {
    pub state: State,
    pub start: bool,
    pub done: bool,
    pub reset: bool,
}

impl CoreState {
    pub fn idle() -> Self {
        Self::default()
    }
}

/// IDLE --start--> COMPUTE --complete--> DONE --reset--> IDLE.
/// Anything else holds the current state.
pub fn step_state(current: CoreState, signals: Signals) -> CoreState {
    let next = match (current.state, signals) {
        (State::Idle, Signals { start: true, .. }) => State::Compute,
        (State::Compute, Signals { complete: true, .. }) => State::Done,
        (State::Done, Signals { reset: true, .. }) => State::Idle,
        (s, _) => s,
    };
    CoreState {
        state: next,
        start: signals.start,
        reset: signals.reset,
        done: next == State::Done,
    }
}
