pub mod check;
pub mod friedrichs;
pub mod run;
pub mod sweep;

pub use check::check_command;
pub use friedrichs::friedrichs_command;
pub use run::run_command;
pub use sweep::sweep_command;
