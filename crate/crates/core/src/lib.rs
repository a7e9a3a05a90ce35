pub mod codes;
pub mod dynamics;
pub mod error;
pub mod errorbudget;
pub mod hilbert;
pub mod linalg;
pub mod optim;
pub mod protocol;
pub mod tomography;
pub mod scenario;
