# Corpus ingestion and user documents
