//! Unsupervised views of a labeled corpus: per-class aggregate profiles,
//! Ward clustering over cosine distance, collapsed-Gibbs LDA and class
//! similarity matrices.

mod lda;
mod profiles;
mod ward;

pub use lda::{count_documents, lda_fit, CountCorpus, LdaParams, LdaSampler, TopicModel, TopicTerms};
pub use profiles::{
    class_profiles_lda, class_profiles_tfidf, cosine_similarity, similarity_matrix, ClassProfile, SimilarPair,
    SimilarityMatrix,
};
pub use ward::{ward_cluster, Dendrogram, Merge};
