//! Library backing the `hks` binary: configuration, report assembly, and
//! the four commands (run, sweep, check, friedrichs).

pub mod commands;
pub mod config;
pub mod report;
pub mod theory;

/// Process exit codes shared by the commands.
pub mod exit_code {
    /// Run finished at the configured horizon.
    pub const OK: i32 = 0;
    /// Configuration or input error.
    pub const CONFIG: i32 = 1;
    /// Integration halted on the blow-up detector.
    pub const BLOW_UP: i32 = 2;
    /// CFL control pushed the step below its floor.
    pub const UNDERFLOW: i32 = 3;
}
