var version = app.viewerVersion;
if (version < 8.0) {
    featureB.sendMessage();
}
