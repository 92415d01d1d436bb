pub mod absint;
pub mod axes;
pub mod dtd;
pub mod oracle;
pub mod relalg;
pub mod xpath;
