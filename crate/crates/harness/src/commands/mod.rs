pub mod beable;
pub mod born;
pub mod figure2;
pub mod oracle;
pub mod verify;
