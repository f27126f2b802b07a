use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate txid {0}")]
    DuplicateTxid(String),

    #[error("transaction {txid}: {msg}")]
    InvalidTransaction { txid: String, msg: String },

    #[error("unknown address {0}")]
    UnknownAddress(String),

    #[error("unknown transaction {0}")]
    UnknownTransaction(String),

    #[error("line {line}: unknown service tag {tag:?}")]
    UnknownTag { line: usize, tag: String },

    #[error("line {line}: address {address} tagged twice")]
    DuplicateTag { line: usize, address: String },

    #[error("subgraph too large: {transactions} transactions, {addresses} addresses")]
    SizeLimit { transactions: usize, addresses: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty graph")]
    EmptyGraph,

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
